//! Neyman-Pearson hypothesis testing between two pmfs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::prob::Pmf;

/// Optimal randomized test: accept every outcome whose likelihood ratio
/// exceeds `threshold`, accept the boundary outcomes with probability
/// `randomization`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NPTest {
    /// `P/Q` at the boundary; infinite when `Q` vanishes there.
    pub threshold: f64,
    pub randomization: f64,
    pub accepted: Vec<usize>,
    pub boundary: Vec<usize>,
}

fn ratio(p: f64, q: f64) -> f64 {
    if q == 0.0 {
        f64::INFINITY
    } else {
        p / q
    }
}

fn same_ratio(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-12 * a.abs().max(b.abs()))
}

/// `β_ε(P, Q)`: smallest `Q`-probability of acceptance over tests that
/// accept with `P`-probability at least `1 − ε`.
pub fn beta_epsilon(p: &Pmf, q: &Pmf, eps: f64) -> Result<(f64, NPTest)> {
    if p.len() != q.len() {
        return Err(Error::usage(format!("alphabets differ: {} vs {}", p.len(), q.len())));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::usage(format!("ε = {eps} must lie in [0, 1)")));
    }
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p.get(i) > 0.0).collect();
    order.sort_by(|&a, &b| ratio(p.get(b), q.get(b)).total_cmp(&ratio(p.get(a), q.get(a))));
    let target = 1.0 - eps;
    let mut p_acc = NeumaierSum::default();
    let mut q_acc = NeumaierSum::default();
    let mut accepted = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let r = ratio(p.get(order[i]), q.get(order[i]));
        let mut j = i;
        while j < order.len() && same_ratio(ratio(p.get(order[j]), q.get(order[j])), r) {
            j += 1;
        }
        let group = &order[i..j];
        let gp = NeumaierSum::total(group.iter().map(|&k| p.get(k)));
        let gq = NeumaierSum::total(group.iter().map(|&k| q.get(k)));
        let need = target - p_acc.value();
        if gp >= need {
            let rnd = (need / gp).clamp(0.0, 1.0);
            q_acc.add(rnd * gq);
            let beta = q_acc.value().clamp(0.0, 1.0);
            return Ok((
                beta,
                NPTest {
                    threshold: r,
                    randomization: rnd,
                    accepted,
                    boundary: group.to_vec(),
                },
            ));
        }
        p_acc.add(gp);
        q_acc.add(gq);
        accepted.extend_from_slice(group);
        i = j;
    }
    // rounding left P-mass slightly short of the target
    Ok((
        q_acc.value().clamp(0.0, 1.0),
        NPTest {
            threshold: 0.0,
            randomization: 1.0,
            accepted,
            boundary: Vec::new(),
        },
    ))
}

/// `−log β_ε(P,Q) ≤ λ − log(P[log P/Q ≤ λ] − ε)`.
pub fn beta_upper_bound(p: &Pmf, q: &Pmf, eps: f64, lambda: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::usage(format!("alphabets differ: {} vs {}", p.len(), q.len())));
    }
    let tail = NeumaierSum::total((0..p.len()).filter_map(|i| {
        let (pi, qi) = (p.get(i), q.get(i));
        (pi > 0.0 && qi > 0.0 && (pi / qi).log2() <= lambda).then_some(pi)
    }));
    if tail <= eps {
        return Err(Error::infeasible(
            format!("P[log P/Q ≤ {lambda}] = {tail} does not exceed ε = {eps}"),
            None,
        ));
    }
    Ok(lambda - (tail - eps).log2())
}

/// Brute-force `β_ε` over every vertex of the randomized-test polytope:
/// a deterministic acceptance set plus at most one fractional outcome.
/// Exponential in the alphabet; an oracle for small alphabets.
pub fn beta_by_vertices(p: &Pmf, q: &Pmf, eps: f64) -> f64 {
    let k = p.len();
    assert!(k <= 16, "vertex enumeration is for small alphabets");
    let target = 1.0 - eps;
    let mut best = f64::INFINITY;
    for set in 0u32..(1 << k) {
        let inside = |i: usize| set >> i & 1 == 1;
        let pa: f64 = (0..k).filter(|&i| inside(i)).map(|i| p.get(i)).sum();
        let qa: f64 = (0..k).filter(|&i| inside(i)).map(|i| q.get(i)).sum();
        if pa >= target - 1e-15 {
            best = best.min(qa);
            continue;
        }
        for b in (0..k).filter(|&i| !inside(i) && p.get(i) > 0.0) {
            let r = (target - pa) / p.get(b);
            if r <= 1.0 {
                best = best.min(qa + r * q.get(b));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pmf(rng: &mut ChaCha8Rng, k: usize) -> Pmf {
        let w: Vec<f64> = (0..k).map(|_| if rng.random_bool(0.15) { 0.0 } else { rng.random::<f64>() }).collect();
        let s: f64 = w.iter().sum();
        if s == 0.0 {
            return Pmf::uniform(k);
        }
        Pmf::new(w.iter().map(|v| v / s).collect()).unwrap()
    }

    #[test]
    fn identical_pmfs() {
        let p = Pmf::new(vec![0.2, 0.3, 0.5]).unwrap();
        for eps in [0.0, 0.1, 0.3, 0.9] {
            assert!((beta_epsilon(&p, &p, eps).unwrap().0 - (1.0 - eps)).abs() < 1e-15);
        }
    }

    #[test]
    fn disjoint_supports() {
        let p = Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let q = Pmf::new(vec![0.0, 0.0, 0.3, 0.7]).unwrap();
        for eps in [0.0, 0.4] {
            assert_eq!(beta_epsilon(&p, &q, eps).unwrap().0, 0.0);
        }
    }

    #[test]
    fn two_point_example() {
        let p = Pmf::new(vec![0.5, 0.5]).unwrap();
        let q = Pmf::new(vec![0.9, 0.1]).unwrap();
        let (b, test) = beta_epsilon(&p, &q, 0.5).unwrap();
        assert!((b - 0.1).abs() < 1e-15);
        assert_eq!(test.boundary, vec![1]);
        assert!((beta_by_vertices(&p, &q, 0.5) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn matches_vertex_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let k = rng.random_range(1..=5);
            let (p, q) = (random_pmf(&mut rng, k), random_pmf(&mut rng, k));
            let eps = rng.random::<f64>() * 0.99;
            let exact = beta_epsilon(&p, &q, eps).unwrap().0;
            assert!((exact - beta_by_vertices(&p, &q, eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn upper_bound_dominates_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        while checked < 100 {
            let k = rng.random_range(2..=6);
            let (p, q) = (random_pmf(&mut rng, k), random_pmf(&mut rng, k));
            let eps = rng.random::<f64>() * 0.5;
            let lambda = rng.random::<f64>() * 6.0 - 1.0;
            if let Ok(ub) = beta_upper_bound(&p, &q, eps, lambda) {
                let b = beta_epsilon(&p, &q, eps).unwrap().0;
                assert!(ub >= -b.log2() - 1e-12);
                checked += 1;
            }
        }
    }

    #[test]
    fn upper_bound_equal_pmfs() {
        let p = Pmf::new(vec![0.25; 4]).unwrap();
        let b = beta_upper_bound(&p, &p, 0.2, 0.0).unwrap();
        assert!((b + 0.8f64.log2()).abs() < 1e-15);
        assert!(matches!(beta_upper_bound(&p, &p, 0.2, -1.0), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn nonincreasing_in_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k = rng.random_range(2..=8);
            let (p, q) = (random_pmf(&mut rng, k), random_pmf(&mut rng, k));
            let mut prev = f64::INFINITY;
            for i in 0..20 {
                let b = beta_epsilon(&p, &q, i as f64 * 0.05).unwrap().0;
                assert!(b <= prev + 1e-15);
                prev = b;
            }
        }
    }
}
