//! Rates for mixtures of IID sources.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{binary_convolution, binary_entropy, density_stats, JointPmf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedRates {
    /// `h(p₂ ∗ q) − h(p₂)`.
    pub capacity: f64,
    /// `h(p₁ ∗ q) − h(p₂)`; may be negative, in which case `clamped` is set.
    pub noninteractive: f64,
    pub clamped: bool,
}

/// Two binary symmetric components with crossovers `p₁ < p₂` between `X`
/// and `Y`, and `q` between `X` and `Z`.
pub fn mixed_source_rates(p1: f64, p2: f64, q: f64) -> Result<MixedRates> {
    if !(0.0 < p1 && p1 <= p2 && p2 < 0.5) {
        return Err(Error::usage(format!("need 0 < p₁ ≤ p₂ < 1/2, got p₁ = {p1}, p₂ = {p2}")));
    }
    if !(0.0..0.5).contains(&q) {
        return Err(Error::usage(format!("need 0 ≤ q < 1/2, got {q}")));
    }
    let h2 = binary_entropy(p2);
    let nonint = binary_entropy(binary_convolution(p1, q)) - h2;
    Ok(MixedRates {
        capacity: binary_entropy(binary_convolution(p2, q)) - h2,
        noninteractive: nonint.max(0.0),
        clamped: nonint < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureRates {
    /// `min_i I(X_i ∧ Y_i | Z_i)`.
    pub capacity: f64,
    /// `min_i H(X_i|Z_i) − max_i H(X_i|Y_i)`.
    pub noninteractive: f64,
}

fn cond_entropy(p: &JointPmf, given_y: bool) -> f64 {
    p.support()
        .map(|(x, y, z, v)| {
            let c = if given_y { p.p_xy(x, y) / p.p_y(y) } else { p.p_xz(x, z) / p.p_z(z) };
            -v * c.log2()
        })
        .sum()
}

/// Capacity of a mixture of IID sources whose components are Markov chains
/// `X − Y − Z`.
pub fn mixture_spectral_rate(components: &[JointPmf]) -> Result<MixtureRates> {
    if components.is_empty() {
        return Err(Error::usage("need at least one component"));
    }
    for (i, c) in components.iter().enumerate() {
        if !c.is_markov(1e-10) {
            return Err(Error::usage(format!(
                "component {i} is not a Markov chain X − Y − Z; the capacity formula needs it"
            )));
        }
    }
    let capacity = components
        .iter()
        .map(|c| density_stats(c).mutual_info)
        .fold(f64::INFINITY, f64::min);
    let hz = components.iter().map(|c| cond_entropy(c, false)).fold(f64::INFINITY, f64::min);
    let hy = components.iter().map(|c| cond_entropy(c, true)).fold(f64::NEG_INFINITY, f64::max);
    Ok(MixtureRates {
        capacity,
        noninteractive: hz - hy,
    })
}

/// `X` a uniform bit, `Y = X ⊕ Bern(p)`, `Z = Y ⊕ Bern(q)`.
pub fn bsc_component(p: f64, q: f64) -> Result<JointPmf> {
    if !((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q)) {
        return Err(Error::usage("crossover probabilities must lie in [0, 1]"));
    }
    let mut t = vec![0.0; 8];
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let a = if x == y { 1.0 - p } else { p };
                let b = if y == z { 1.0 - q } else { q };
                t[(x * 2 + y) * 2 + z] = 0.5 * a * b;
            }
        }
    }
    JointPmf::new(2, 2, 2, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_crossovers_give_equal_rates() {
        let r = mixed_source_rates(0.1, 0.1, 0.2).unwrap();
        assert_eq!(r.capacity, r.noninteractive);
    }

    #[test]
    fn strict_gap() {
        let r = mixed_source_rates(0.05, 0.15, 0.1).unwrap();
        assert!(r.capacity > r.noninteractive + 0.05);
        // h(0.22) − h(0.15) and h(0.14) − h(0.15), evaluated independently
        let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert!((r.capacity - (h(0.22) - h(0.15))).abs() < 1e-12);
        assert!((h(0.14) - h(0.15) - r.noninteractive).abs() < 1e-12 || r.clamped);
    }

    #[test]
    fn degenerate_eavesdropper() {
        let r = mixed_source_rates(0.05, 0.15, 0.0).unwrap();
        assert!(r.capacity.abs() < 1e-15);
        assert!(r.clamped && r.noninteractive == 0.0);
    }

    #[test]
    fn ordering_enforced() {
        assert!(mixed_source_rates(0.2, 0.1, 0.1).is_err());
    }

    #[test]
    fn single_and_repeated_components() {
        let c = crate::prob::example1_pmf(0.25, 0.125).unwrap();
        let i = density_stats(&c).mutual_info;
        assert!((mixture_spectral_rate(std::slice::from_ref(&c)).unwrap().capacity - i).abs() < 1e-15);
        assert!((mixture_spectral_rate(&[c.clone(), c]).unwrap().capacity - i).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_closed_form() {
        let (p1, p2, q) = (0.05, 0.15, 0.1);
        let comps = [bsc_component(p1, q).unwrap(), bsc_component(p2, q).unwrap()];
        let m = mixture_spectral_rate(&comps).unwrap();
        let r = mixed_source_rates(p1, p2, q).unwrap();
        assert!((m.capacity - r.capacity).abs() < 1e-12);
        assert!((m.noninteractive - (binary_entropy(binary_convolution(p1, q)) - binary_entropy(p2))).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_markov() {
        // X and Z agree more than Y explains
        let bad = JointPmf::new(2, 2, 2, vec![0.3, 0.0, 0.1, 0.1, 0.0, 0.1, 0.1, 0.3]).unwrap();
        assert!(mixture_spectral_rate(&[bad]).is_err());
    }
}
