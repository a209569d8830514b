//! Exact distributions of summed single-letter densities over IID blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::prob::JointPmf;

/// Atoms closer than this are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Threshold comparisons treat values within this distance of a boundary as
/// lying on it, so sums that are exact in real arithmetic land on the side
/// they would in exact arithmetic.
pub const BOUNDARY_SNAP: f64 = 1e-9;

/// Default cap on the number of atoms kept during convolution.
pub const DEFAULT_ATOM_CAP: usize = 1_000_000;

/// Which single-letter density is summed over the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    /// `i(x;y|z)`.
    CondInfo,
    /// `h(x|y) = −log p(x|y)`.
    CondLogLikelihood,
    /// `i(x;y) − i(x;z)`.
    InfoDifference,
    /// `i(x;y)`.
    MutualInfo,
    /// `−log p(x)`.
    SelfInfo,
}

impl DensityKind {
    /// Density value at a support cell.
    pub fn eval(self, pmf: &JointPmf, x: usize, y: usize, z: usize) -> Result<f64> {
        match self {
            DensityKind::CondInfo => pmf.info_density(x, y, z),
            DensityKind::CondLogLikelihood => pmf.cond_log_likelihood(x, y),
            DensityKind::InfoDifference => {
                Ok(pmf.info_density_xy(x, y)? - pmf.info_density_xz(x, z)?)
            }
            DensityKind::MutualInfo => pmf.info_density_xy(x, y),
            DensityKind::SelfInfo => pmf.self_information(x),
        }
    }
}

/// Finite distribution over real values, atoms sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDistribution {
    atoms: Vec<(f64, f64)>,
}

impl SpectrumDistribution {
    /// Sort, drop zero mass and merge close values. The merged atom keeps the
    /// value of the smallest member.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|(v, p)| !v.is_finite() || !p.is_finite() || *p < 0.0) {
            return Err(Error::usage("spectrum atoms must be finite with nonnegative mass"));
        }
        atoms.retain(|(_, p)| *p > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if v - last.0 <= MERGE_TOLERANCE => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        Ok(Self { atoms: merged })
    }

    /// Single-letter spectrum of `kind` under `pmf`.
    pub fn single_letter(pmf: &JointPmf, kind: DensityKind) -> Result<Self> {
        let atoms = pmf
            .support()
            .map(|(x, y, z, p)| kind.eval(pmf, x, y, z).map(|v| (v, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        NeumaierSum::total(self.atoms.iter().map(|a| a.1))
    }

    /// Distribution of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &Self, cap: usize) -> Result<Self> {
        let needed = self.len() as u128 * other.len() as u128;
        let mut atoms = Vec::with_capacity(needed.min(cap as u128 * 4) as usize);
        for &(a, p) in &self.atoms {
            for &(b, q) in &other.atoms {
                atoms.push((a + b, p * q));
            }
        }
        let out = Self::from_atoms(atoms)?;
        if out.len() > cap {
            return Err(Error::resource(
                "spectrum atoms",
                out.len() as u128,
                cap as u128,
                "use the Berry-Esseen tail approximation or Monte Carlo mode",
            ));
        }
        Ok(out)
    }

    /// Weighted mixture of spectra.
    pub fn mixture(parts: &[(f64, SpectrumDistribution)]) -> Result<Self> {
        let atoms = parts
            .iter()
            .flat_map(|(w, s)| s.atoms.iter().map(move |(v, p)| (*v, w * p)))
            .collect();
        Self::from_atoms(atoms)
    }

    /// `P[V ≤ t]`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.mass_where(|v| v - BOUNDARY_SNAP <= t)
    }

    /// `P[V < t]`.
    pub fn below(&self, t: f64) -> f64 {
        self.mass_where(|v| v + BOUNDARY_SNAP < t)
    }

    /// `P[lo ≤ V < hi]`.
    pub fn prob_in(&self, lo: f64, hi: f64) -> f64 {
        self.mass_where(|v| lo <= v + BOUNDARY_SNAP && v + BOUNDARY_SNAP < hi)
    }

    fn mass_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        NeumaierSum::total(self.atoms.iter().filter(|a| pred(a.0)).map(|a| a.1))
    }

    pub fn mean(&self) -> f64 {
        NeumaierSum::total(self.atoms.iter().map(|(v, p)| v * p))
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        NeumaierSum::total(self.atoms.iter().map(|(v, p)| p * (v - m).powi(2)))
    }

    pub fn min_value(&self) -> Option<f64> {
        self.atoms.first().map(|a| a.0)
    }

    pub fn max_value(&self) -> Option<f64> {
        self.atoms.last().map(|a| a.0)
    }
}

/// Exact spectrum of the `n`-fold sum of `kind` under IID draws of `pmf`.
pub fn block_spectrum(
    pmf: &JointPmf,
    kind: DensityKind,
    n: usize,
    cap: usize,
) -> Result<SpectrumDistribution> {
    if n == 0 {
        return Err(Error::usage("blocklength must be at least 1"));
    }
    let base = SpectrumDistribution::single_letter(pmf, kind)?;
    let mut acc = base.clone();
    for _ in 1..n {
        acc = acc.convolve(&base, cap)?;
    }
    if acc.len() > cap {
        return Err(Error::resource(
            "spectrum atoms",
            acc.len() as u128,
            cap as u128,
            "use the Berry-Esseen tail approximation or Monte Carlo mode",
        ));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{example1_pmf, density_stats, block_digits};

    fn bits_equal() -> JointPmf {
        JointPmf::from_xy(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn n1_equals_single_letter_values() {
        let p = example1_pmf(0.25, 0.125).unwrap();
        let s = block_spectrum(&p, DensityKind::CondInfo, 1, DEFAULT_ATOM_CAP).unwrap();
        let mut direct: Vec<f64> = p.support().map(|(x, y, z, _)| p.info_density(x, y, z).unwrap()).collect();
        direct.sort_by(f64::total_cmp);
        direct.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOLERANCE);
        let values: Vec<f64> = s.atoms().iter().map(|a| a.0).collect();
        assert_eq!(values, direct);
        assert_eq!(values.len(), 4);
    }

    #[test]
    fn constant_density_gives_single_atom() {
        let s = block_spectrum(&bits_equal(), DensityKind::CondInfo, 2, 10).unwrap();
        assert_eq!(s.atoms(), &[(2.0, 1.0)]);
    }

    #[test]
    fn merges_close_values() {
        let s = SpectrumDistribution::from_atoms(vec![(1.0, 0.25), (1.0 + 1e-13, 0.25), (2.0, 0.5)]).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.atoms()[0].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn brute_force_paths_match_convolution() {
        let p = example1_pmf(0.25, 0.125).unwrap();
        let cells: Vec<_> = p.support().collect();
        for kind in [DensityKind::CondInfo, DensityKind::CondLogLikelihood, DensityKind::InfoDifference] {
            for n in 1..=4 {
                let s = block_spectrum(&p, kind, n, DEFAULT_ATOM_CAP).unwrap();
                let mut atoms = Vec::new();
                for idx in 0..cells.len().pow(n as u32) {
                    let digits = block_digits(idx, cells.len(), n);
                    let (mut v, mut q) = (0.0, 1.0);
                    for d in digits {
                        let (x, y, z, w) = cells[d];
                        v += kind.eval(&p, x, y, z).unwrap();
                        q *= w;
                    }
                    atoms.push((v, q));
                }
                let oracle = SpectrumDistribution::from_atoms(atoms).unwrap();
                for t in [0.0, 0.5 * n as f64, 0.35 * n as f64, 1.2 * n as f64] {
                    assert!((s.cdf(t) - oracle.cdf(t)).abs() < 1e-12, "{kind:?} n={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn additivity_of_blocklength() {
        let p = example1_pmf(0.2, 0.3).unwrap();
        let s5 = block_spectrum(&p, DensityKind::CondInfo, 5, DEFAULT_ATOM_CAP).unwrap();
        let s2 = block_spectrum(&p, DensityKind::CondInfo, 2, DEFAULT_ATOM_CAP).unwrap();
        let s3 = block_spectrum(&p, DensityKind::CondInfo, 3, DEFAULT_ATOM_CAP).unwrap();
        let c = s2.convolve(&s3, DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(c.len(), s5.len());
        for (a, b) in c.atoms().iter().zip(s5.atoms()) {
            assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10);
        }
    }

    #[test]
    fn moments_scale_with_n() {
        let p = example1_pmf(0.25, 0.125).unwrap();
        let st = density_stats(&p);
        for n in [1, 7, 10, 30] {
            let s = block_spectrum(&p, DensityKind::CondInfo, n, DEFAULT_ATOM_CAP).unwrap();
            assert!((s.total_mass() - 1.0).abs() < 1e-12);
            assert!((s.mean() - n as f64 * st.mutual_info).abs() < 1e-9);
            assert!((s.variance() - n as f64 * st.variance).abs() < 1e-9);
        }
    }

    #[test]
    fn markov_identity_pointwise() {
        let p = example1_pmf(0.1, 0.35).unwrap();
        for (x, y, z, _) in p.support() {
            let a = DensityKind::InfoDifference.eval(&p, x, y, z).unwrap();
            let b = DensityKind::CondInfo.eval(&p, x, y, z).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn cap_exceeded_is_resource_error() {
        let p = example1_pmf(0.25, 0.125).unwrap();
        let err = block_spectrum(&p, DensityKind::CondInfo, 40, 100).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn threshold_queries() {
        let s = SpectrumDistribution::from_atoms(vec![(1.0, 0.25), (2.0, 0.25), (3.0, 0.5)]).unwrap();
        assert_eq!(s.cdf(2.0), 0.5);
        assert_eq!(s.below(2.0), 0.25);
        assert_eq!(s.prob_in(1.0, 3.0), 0.5);
        assert_eq!(s.prob_in(3.0, 4.0), 0.5);
        assert_eq!(s.min_value(), Some(1.0));
    }
}
