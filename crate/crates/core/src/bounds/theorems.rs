//! Single-shot converse and achievability conditions.

use serde::Serialize;

use super::gaussian::gaussian_q;
use super::np::{beta_epsilon, beta_upper_bound};
use crate::error::{Error, Result};
use crate::prob::JointPmf;
use crate::protocol::SessionConfig;
use crate::source::{SourceModel, SpectrumMode};
use crate::spectrum::{DensityKind, SpectrumDistribution, DEFAULT_ATOM_CAP};

/// Mixture sources are enumerated as one table up to this many cells.
pub const MIXTURE_TABLE_CAP: u128 = 1 << 20;

/// How a block tail probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    Exact,
    ComponentMixture,
    /// Normal approximation plus the Berry-Esseen remainder, so the value
    /// still upper-bounds the true tail.
    BerryEsseen,
}

/// Block spectrum of `kind` with the atom cap, or `None` past it.
fn block_spectrum_or_none(
    source: &SourceModel,
    kind: DensityKind,
    atom_cap: usize,
) -> Result<Option<(SpectrumDistribution, TailMode)>> {
    match source.spectrum(kind, atom_cap, MIXTURE_TABLE_CAP) {
        Ok((s, SpectrumMode::Exact)) => Ok(Some((s, TailMode::Exact))),
        Ok((s, SpectrumMode::ComponentMixture)) => Ok(Some((s, TailMode::ComponentMixture))),
        Err(Error::Resource { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Per-component `(weight, n·mean, √n·sd, BE remainder)`.
fn normal_parts(source: &SourceModel, kind: DensityKind) -> Result<Vec<(f64, f64, f64, f64)>> {
    let n = source.n() as f64;
    source
        .components()
        .iter()
        .map(|(w, c)| {
            let s = SpectrumDistribution::single_letter(c, kind)?;
            let (m, v) = (s.mean(), s.variance());
            let rho: f64 = s.atoms().iter().map(|(x, p)| p * (x - m).abs().powi(3)).sum();
            let err = if v > 0.0 { 0.56 * rho / (v.powf(1.5) * n.sqrt()) } else { 0.0 };
            Ok((*w, n * m, (n * v).sqrt(), err))
        })
        .collect()
}

fn normal_cdf(t: f64, mean: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return if mean <= t { 1.0 } else { 0.0 };
    }
    1.0 - gaussian_q((t - mean) / sd)
}

/// `P[S ≤ t]` for the block sum `S` of `kind`.
pub fn block_cdf(source: &SourceModel, kind: DensityKind, t: f64, atom_cap: usize) -> Result<(f64, TailMode)> {
    if let Some((s, mode)) = block_spectrum_or_none(source, kind, atom_cap)? {
        return Ok((s.cdf(t), mode));
    }
    let v = normal_parts(source, kind)?
        .iter()
        .map(|(w, m, sd, e)| w * (normal_cdf(t, *m, *sd) + e).min(1.0))
        .sum::<f64>();
    Ok((v.min(1.0), TailMode::BerryEsseen))
}

/// `P[S ∉ [lo, hi)]`.
pub fn block_outside(source: &SourceModel, kind: DensityKind, lo: f64, hi: f64, atom_cap: usize) -> Result<(f64, TailMode)> {
    if let Some((s, mode)) = block_spectrum_or_none(source, kind, atom_cap)? {
        return Ok(((1.0 - s.prob_in(lo, hi)).max(0.0), mode));
    }
    let v = normal_parts(source, kind)?
        .iter()
        .map(|(w, m, sd, e)| w * (normal_cdf(lo, *m, *sd) + 1.0 - normal_cdf(hi, *m, *sd) + 2.0 * e).min(1.0))
        .sum::<f64>();
    Ok((v.min(1.0), TailMode::BerryEsseen))
}

/// Converse bound `−log β_{ε+δ+η}(P, Q) + 2 log(1/η)` with
/// `Q = Q_{X|Z} Q_{Y|Z} Q_Z`.
pub fn thm1_converse(p: &JointPmf, q: &JointPmf, eps: f64, delta: f64, eta: f64) -> Result<f64> {
    check_thm1(p, q, eps, delta, eta)?;
    let (beta, _) = beta_epsilon(&p.as_pmf(), &q.as_pmf(), eps + delta + eta)?;
    if beta == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-beta.log2() + 2.0 * (1.0 / eta).log2())
}

/// As [`thm1_converse`], with `β` replaced by its threshold bound at `λ`.
pub fn thm1_converse_relaxed(p: &JointPmf, q: &JointPmf, eps: f64, delta: f64, eta: f64, lambda: f64) -> Result<f64> {
    check_thm1(p, q, eps, delta, eta)?;
    Ok(beta_upper_bound(&p.as_pmf(), &q.as_pmf(), eps + delta + eta, lambda)? + 2.0 * (1.0 / eta).log2())
}

/// Smallest converse over a grid of `η`, with the minimizing `η`.
pub fn thm1_converse_best(p: &JointPmf, q: &JointPmf, eps: f64, delta: f64, etas: &[f64]) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &eta in etas {
        if let Ok(v) = thm1_converse(p, q, eps, delta, eta) {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((eta, v));
            }
        }
    }
    best.ok_or_else(|| Error::infeasible("no feasible η on the grid", None))
}

fn check_thm1(p: &JointPmf, q: &JointPmf, eps: f64, delta: f64, eta: f64) -> Result<()> {
    if p.sizes() != q.sizes() {
        return Err(Error::usage("P and Q must share alphabets"));
    }
    if !(eps >= 0.0 && delta >= 0.0 && eps + delta < 1.0) {
        return Err(Error::usage(format!("need 0 ≤ ε+δ < 1, got ε = {eps}, δ = {delta}")));
    }
    if !(eta > 0.0 && eta < 1.0 - eps - delta) {
        return Err(Error::usage(format!("η = {eta} must lie in (0, 1−ε−δ)")));
    }
    let fact = q.conditional_product();
    if q.table().iter().zip(fact.table()).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::usage("Q must factor as Q_{X|Z} Q_{Y|Z} Q_Z"));
    }
    Ok(())
}

/// Bound values are not clamped; above 1 they are vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem2Bounds {
    pub eps: f64,
    pub delta: f64,
    pub p_t0: f64,
    /// `P[i_XY − i_XZ ≤ λ+Δ]`.
    pub tail: f64,
    /// `½√(|K| 2^{−(λ−γ−3 log L)})`.
    pub hash_term: f64,
    pub mode: TailMode,
}

/// Interactive-protocol bounds:
/// `ε ≤ P(T₀) + L 2^{−γ}`,
/// `δ ≤ P[i_XY − i_XZ ≤ λ+Δ] + ½√(|K| 2^{−(λ−γ−3 log L)}) + 1/L + P(T₀) + L 2^{−γ}`.
pub fn theorem2_bounds(source: &SourceModel, config: &SessionConfig) -> Result<Theorem2Bounds> {
    config.validate()?;
    let s = &config.slices;
    let l = s.count() as f64;
    let (p_t0, m1) = block_outside(
        source,
        DensityKind::CondLogLikelihood,
        s.lambda_min(),
        s.lambda_max(),
        DEFAULT_ATOM_CAP,
    )?;
    let (tail, m2) = block_cdf(source, DensityKind::InfoDifference, config.lambda + s.delta(), DEFAULT_ATOM_CAP)?;
    let a = l * (-config.gamma).exp2();
    let hash_term = 0.5 * (config.key_bits as f64 - (config.lambda - config.gamma - 3.0 * l.log2())).exp2().sqrt();
    Ok(Theorem2Bounds {
        eps: p_t0 + a,
        delta: tail + hash_term + 1.0 / l + p_t0 + a,
        p_t0,
        tail,
        hash_term,
        mode: worse(m1, m2),
    })
}

fn worse(a: TailMode, b: TailMode) -> TailMode {
    let rank = |m| match m {
        TailMode::Exact => 0,
        TailMode::ComponentMixture => 1,
        TailMode::BerryEsseen => 2,
    };
    if rank(a) >= rank(b) {
        a
    } else {
        b
    }
}

/// `c^{1/3}` with `c = L⁴ |K| 2^{−λ}`.
fn corollary_cube_root(l: f64, key_bits: usize, lambda: f64) -> f64 {
    (4.0 * l.log2() + key_bits as f64 - lambda).exp2().cbrt()
}

/// `γ` with `L 2^{−γ} = ¼ (L⁴ |K| 2^{−λ})^{1/3}`.
pub fn corollary1_gamma(slice_count: usize, key_bits: usize, lambda: f64) -> f64 {
    let l = slice_count as f64;
    (l / (0.25 * corollary_cube_root(l, key_bits, lambda))).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corollary1Report {
    /// `ε − P(T₀) − ¼ c^{1/3}`.
    pub eps_margin: f64,
    /// `ε + δ − (tail + 1/L + 2P(T₀) + (3/2) c^{1/3})`.
    pub sum_margin: f64,
    pub satisfied: bool,
    pub mode: TailMode,
}

pub fn corollary1_check(source: &SourceModel, config: &SessionConfig, eps: f64, delta: f64) -> Result<Corollary1Report> {
    let t2 = theorem2_bounds(source, config)?;
    let l = config.slices.count() as f64;
    let c3 = corollary_cube_root(l, config.key_bits, config.lambda);
    let eps_margin = eps - t2.p_t0 - 0.25 * c3;
    let sum_margin = eps + delta - (t2.tail + 1.0 / l + 2.0 * t2.p_t0 + 1.5 * c3);
    Ok(Corollary1Report {
        eps_margin,
        sum_margin,
        satisfied: eps_margin >= 0.0 && sum_margin >= 0.0,
        mode: t2.mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem5Bounds {
    pub eps: f64,
    pub delta: f64,
    /// `P[i_XY ≤ λ+γ+Δ]`.
    pub tail: f64,
    /// `P(X₀)`: `−log p(X)` outside the sliced range.
    pub p_x0: f64,
    pub hash_term: f64,
    pub feedback: bool,
    pub mode: TailMode,
}

/// One-way protocol bounds:
/// `ε ≤ P[i_XY ≤ λ+γ+Δ] + P(X₀) + 2^{−γ} + 1/L`, `δ ≤ ½√(|K| 2^{−(λ−2 log L)})`.
/// With feedback the tail term moves from `ε` to `δ`.
pub fn theorem5_bounds(source: &SourceModel, config: &SessionConfig) -> Result<Theorem5Bounds> {
    config.validate()?;
    if !source.z_is_constant() {
        return Err(Error::usage("one-way protocol bounds need a constant eavesdropper observation"));
    }
    let s = &config.slices;
    if config.lambda > s.lambda_min() + 1e-12 {
        return Err(Error::usage("one-way protocol bounds need λ ≤ λ_min"));
    }
    let l = s.count() as f64;
    let (tail, m1) = block_cdf(source, DensityKind::MutualInfo, config.lambda + config.gamma + s.delta(), DEFAULT_ATOM_CAP)?;
    let (p_x0, m2) = block_outside(source, DensityKind::SelfInfo, s.lambda_min(), s.lambda_max(), DEFAULT_ATOM_CAP)?;
    let hash_term = 0.5 * (config.key_bits as f64 - (config.lambda - 2.0 * l.log2())).exp2().sqrt();
    let rest = p_x0 + (-config.gamma).exp2() + 1.0 / l;
    let feedback = config.variant.feedback();
    let (eps, delta) = if feedback {
        (rest, hash_term + tail)
    } else {
        (tail + rest, hash_term)
    };
    Ok(Theorem5Bounds {
        eps,
        delta,
        tail,
        p_x0,
        hash_term,
        feedback,
        mode: worse(m1, m2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HybridParameters {
    /// Probability of running the `(η, α)` protocol.
    pub theta: f64,
    pub eps: f64,
    pub delta: f64,
}

/// Time sharing between an `(η, α)` key and its `(α+η, 0)` conversion with
/// `θ = δ/(ε − η + δ)`; returns the guaranteed pair.
pub fn hybrid_parameters(eta: f64, alpha: f64, eps: f64, delta: f64) -> Result<HybridParameters> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::usage("ε and δ must lie in (0, 1)"));
    }
    if eps < eta || eps + delta < alpha + eta {
        return Err(Error::infeasible(
            format!("need ε ≥ η and ε+δ ≥ α+η; got ε = {eps}, δ = {delta}, η = {eta}, α = {alpha}"),
            None,
        ));
    }
    let theta = delta / (eps - eta + delta);
    Ok(HybridParameters {
        theta,
        eps: theta * eta + (1.0 - theta) * (alpha + eta),
        delta: theta * alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::example1_pmf;
    use crate::protocol::Variant;
    use crate::reconciliation::SliceSpec;

    fn dsbs(n: usize) -> SourceModel {
        SourceModel::iid(example1_pmf(0.25, 0.125).unwrap(), n).unwrap()
    }

    #[test]
    fn conditionally_independent_converse() {
        let p = example1_pmf(0.25, 0.125).unwrap().conditional_product();
        let v = thm1_converse(&p, &p, 0.05, 0.05, 0.1).unwrap();
        assert!((v - (-(0.8f64).log2() + 2.0 * 10f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn converse_rejects_unfactored_q() {
        let p = example1_pmf(0.25, 0.125).unwrap();
        assert!(matches!(thm1_converse(&p, &p, 0.05, 0.05, 0.1), Err(Error::Usage(_))));
    }

    #[test]
    fn best_eta_is_grid_minimum() {
        let p = example1_pmf(0.25, 0.125).unwrap();
        let q = p.conditional_product();
        let grid: Vec<f64> = (1..18).map(|i| i as f64 * 0.05).collect();
        let (_, best) = thm1_converse_best(&p, &q, 0.05, 0.05, &grid).unwrap();
        for &eta in &grid {
            if let Ok(v) = thm1_converse(&p, &q, 0.05, 0.05, eta) {
                assert!(best <= v);
            }
        }
    }

    #[test]
    fn theorem2_limits() {
        let src = dsbs(6);
        let slices = SliceSpec::new(1.0, 5.0, 1.0).unwrap();
        let tight = theorem2_bounds(&src, &SessionConfig::new(slices, 60.0, 2.0, 1, Variant::P1).unwrap()).unwrap();
        assert!((tight.eps - tight.p_t0).abs() < 1e-15);
        let big = theorem2_bounds(&src, &SessionConfig::new(slices, 2.0, 200.0, 1, Variant::P1).unwrap()).unwrap();
        assert!(big.hash_term < 1e-20);
        assert_eq!(tight.mode, TailMode::Exact);
    }

    #[test]
    fn corollary_boundary_is_tight() {
        let src = dsbs(6);
        let slices = SliceSpec::new(1.0, 5.0, 1.0).unwrap();
        let l = slices.count() as f64;
        let lambda = 30.0;
        let base = SessionConfig::new(slices, 1.0, lambda, 1, Variant::P1).unwrap();
        let p_t0 = theorem2_bounds(&src, &base).unwrap().p_t0;
        let eps = p_t0 + 0.01;
        // |K| = 2^λ L⁻⁴ (4(ε − P(T₀)))³
        let log_k = lambda - 4.0 * l.log2() + 3.0 * (4.0 * (eps - p_t0)).log2();
        let cube = (4.0 * l.log2() + log_k - lambda).exp2().cbrt();
        assert!((eps - p_t0 - 0.25 * cube).abs() < 1e-9);
        // integer key sizes bracket the boundary
        let k = log_k.floor() as usize;
        let cfg = SessionConfig { key_bits: k, ..base };
        assert!(corollary1_check(&src, &cfg, eps, 1.0).unwrap().eps_margin >= 0.0);
        let cfg = SessionConfig { key_bits: k + 1, ..base };
        assert!(corollary1_check(&src, &cfg, eps, 1.0).unwrap().eps_margin < 0.0);
    }

    #[test]
    fn corollary_gamma_equalizes() {
        let (l, k, lambda) = (5usize, 3usize, 40.0);
        let g = corollary1_gamma(l, k, lambda);
        let a = l as f64 * (-g).exp2();
        assert!((a - 0.25 * corollary_cube_root(l as f64, k, lambda)).abs() < 1e-12);
    }

    #[test]
    fn theorem5_uniform_instance() {
        // X = Y uniform over m = 3 bits, one letter; λ = λ_min = m − 1, L = 1
        let table: Vec<f64> = (0..64).map(|i| if i % 9 == 0 { 0.125 } else { 0.0 }).collect();
        let src = SourceModel::iid(JointPmf::from_xy(8, 8, table).unwrap(), 1).unwrap();
        let slices = SliceSpec::with_count(2.0, 2.0, 1).unwrap();
        for (variant, k) in [(Variant::P2Secrecy, 1usize), (Variant::P2Reliability, 2)] {
            let cfg = SessionConfig::new(slices, 1.0, 2.0, k, variant).unwrap();
            let b = theorem5_bounds(&src, &cfg).unwrap();
            assert!((b.hash_term - 0.5 * ((1u64 << k) as f64 / 4.0).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn feedback_moves_tail() {
        let table = vec![0.4, 0.1, 0.1, 0.4];
        let src = SourceModel::iid(JointPmf::from_xy(2, 2, table).unwrap(), 12).unwrap();
        let slices = SliceSpec::with_count(11.5, 0.1, 10).unwrap();
        let a = theorem5_bounds(&src, &SessionConfig::new(slices, 3.0, 0.0, 1, Variant::P2Secrecy).unwrap()).unwrap();
        let b = theorem5_bounds(&src, &SessionConfig::new(slices, 3.0, 0.0, 1, Variant::P2Reliability).unwrap()).unwrap();
        assert!(a.tail > 0.0);
        assert!((a.eps - b.eps - a.tail).abs() < 1e-12);
        assert!((b.delta - a.delta - a.tail).abs() < 1e-12);
    }

    #[test]
    fn hybrid_arithmetic() {
        let h = hybrid_parameters(0.01, 0.2, 0.05, 0.2).unwrap();
        assert!((h.theta - 0.2 / 0.24).abs() < 1e-15);
        assert!(h.eps >= 0.01 - 1e-15 && h.eps <= 0.05 + 1e-15);
        assert!(h.delta <= 0.2 + 1e-15);
        assert!(h.eps + h.delta >= 0.21 - 1e-15);
        assert!(hybrid_parameters(0.1, 0.2, 0.05, 0.5).is_err());
    }

    #[test]
    fn berry_esseen_fallback_bounds_exact() {
        let src = dsbs(40);
        let (exact, m) = block_cdf(&src, DensityKind::CondLogLikelihood, 20.0, DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(m, TailMode::Exact);
        let (approx, m) = block_cdf(&src, DensityKind::CondLogLikelihood, 20.0, 3).unwrap();
        assert_eq!(m, TailMode::BerryEsseen);
        assert!(approx >= exact);
    }
}
