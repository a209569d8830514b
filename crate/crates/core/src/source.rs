//! Block sources: IID powers of a single-letter table or block-level
//! mixtures of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{block_index, JointPmf, SUM_TOLERANCE};
use crate::rng::StreamRng;
use crate::spectrum::{block_spectrum, DensityKind, SpectrumDistribution, BOUNDARY_SNAP};

/// One realization of `(Xⁿ, Yⁿ, Zⁿ)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    IidPower,
    FiniteMixture,
}

/// How a block spectrum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMode {
    /// Exact distribution of the block density.
    Exact,
    /// Weighted mixture of per-component spectra; used for mixtures whose
    /// block table is too large to enumerate.
    ComponentMixture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    kind: SourceKind,
    components: Vec<(f64, JointPmf)>,
    n: usize,
}

impl SourceModel {
    pub fn iid(base: JointPmf, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("blocklength must be at least 1"));
        }
        Ok(Self {
            kind: SourceKind::IidPower,
            components: vec![(1.0, base)],
            n,
        })
    }

    pub fn mixture(components: Vec<(f64, JointPmf)>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("blocklength must be at least 1"));
        }
        let first = components
            .first()
            .ok_or_else(|| Error::usage("mixture with no components"))?;
        let dims = first.1.sizes();
        if components.iter().any(|(_, c)| c.sizes() != dims) {
            return Err(Error::usage("mixture components over different alphabets"));
        }
        if components.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::usage("mixture weights must be nonnegative"));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::usage(format!("mixture weights sum to {total}")));
        }
        let components = components.into_iter().map(|(w, c)| (w / total, c)).collect();
        Ok(Self {
            kind: SourceKind::FiniteMixture,
            components,
            n,
        })
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same source at another blocklength.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("blocklength must be at least 1"));
        }
        Ok(Self { n, ..self.clone() })
    }

    pub fn components(&self) -> &[(f64, JointPmf)] {
        &self.components
    }

    /// Single-letter table of an IID source.
    pub fn base(&self) -> Option<&JointPmf> {
        match self.kind {
            SourceKind::IidPower => Some(&self.components[0].1),
            SourceKind::FiniteMixture => None,
        }
    }

    /// Single-letter alphabet sizes.
    pub fn alphabet_sizes(&self) -> (usize, usize, usize) {
        self.components[0].1.sizes()
    }

    /// Whether every component is a Markov chain `X − Y − Z` within `tol`.
    pub fn is_markov(&self, tol: f64) -> bool {
        self.components.iter().all(|(_, c)| c.is_markov(tol))
    }

    /// Whether `Z` is constant under every component.
    pub fn z_is_constant(&self) -> bool {
        let (_, _, nz) = self.alphabet_sizes();
        nz == 1 || {
            let z0 = |c: &JointPmf| (0..nz).find(|&z| c.p_z(z) > 0.0);
            let first = z0(&self.components[0].1);
            self.components.iter().all(|(_, c)| c.z_is_constant() && z0(c) == first)
        }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Block {
        let component = if self.components.len() == 1 {
            &self.components[0].1
        } else {
            let u = rng.unit();
            let mut acc = 0.0;
            let mut chosen = &self.components.last().expect("nonempty").1;
            for (w, c) in &self.components {
                acc += w;
                if u < acc {
                    chosen = c;
                    break;
                }
            }
            chosen
        };
        let cells: Vec<_> = component.support().collect();
        let mut block = Block {
            x: Vec::with_capacity(self.n),
            y: Vec::with_capacity(self.n),
            z: Vec::with_capacity(self.n),
        };
        for _ in 0..self.n {
            let u = rng.unit();
            let mut acc = 0.0;
            let mut pick = *cells.last().expect("pmf has support");
            for &cell in &cells {
                acc += cell.3;
                if u < acc {
                    pick = cell;
                    break;
                }
            }
            block.x.push(pick.0);
            block.y.push(pick.1);
            block.z.push(pick.2);
        }
        block
    }

    fn check_len(&self, s: &[usize]) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::usage(format!(
                "sequence of length {}, blocklength is {}",
                s.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// `log₂ Σ_c w_c Π_i f_c(i)` computed stably; `f` returns per-symbol
    /// probabilities.
    fn log_mix(&self, f: impl Fn(&JointPmf, usize) -> f64) -> f64 {
        let logs: Vec<f64> = self
            .components
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, c)| w.log2() + (0..self.n).map(|i| f(c, i).log2()).sum::<f64>())
            .collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + logs.iter().map(|l| (l - m).exp2()).sum::<f64>().log2()
    }

    /// Block probability `P(xⁿ, yⁿ, zⁿ)`.
    pub fn block_prob(&self, b: &Block) -> Result<f64> {
        self.check_len(&b.x)?;
        self.check_len(&b.y)?;
        self.check_len(&b.z)?;
        Ok(self.log_mix(|c, i| c.prob(b.x[i], b.y[i], b.z[i])).exp2())
    }

    /// `−log₂ P(xⁿ | yⁿ)`.
    pub fn cond_log_likelihood(&self, x: &[usize], y: &[usize]) -> Result<f64> {
        self.check_len(x)?;
        self.check_len(y)?;
        let joint = self.log_mix(|c, i| c.p_xy(x[i], y[i]));
        if joint == f64::NEG_INFINITY {
            return Err(Error::domain("conditional log-likelihood at zero joint mass"));
        }
        Ok(self.log_mix(|c, i| c.p_y(y[i])) - joint)
    }

    /// `−log₂ P(xⁿ)`.
    pub fn self_information(&self, x: &[usize]) -> Result<f64> {
        self.check_len(x)?;
        let v = self.log_mix(|c, i| c.p_x(x[i]));
        if v == f64::NEG_INFINITY {
            return Err(Error::domain("self-information at zero mass"));
        }
        Ok(-v)
    }

    /// Block table with symbols indexed most significant first.
    pub fn block_pmf(&self, cap: u128) -> Result<JointPmf> {
        match self.kind {
            SourceKind::IidPower => self.components[0].1.iid_power(self.n, cap),
            SourceKind::FiniteMixture => {
                let parts = self
                    .components
                    .iter()
                    .map(|(w, c)| c.iid_power(self.n, cap).map(|t| (*w, t)))
                    .collect::<Result<Vec<_>>>()?;
                JointPmf::mixture(&parts)
            }
        }
    }

    /// Spectrum of a block density. Mixtures are enumerated exactly when
    /// their block table has at most `table_cap` cells.
    pub fn spectrum(
        &self,
        kind: DensityKind,
        atom_cap: usize,
        table_cap: u128,
    ) -> Result<(SpectrumDistribution, SpectrumMode)> {
        match self.kind {
            SourceKind::IidPower => Ok((
                block_spectrum(&self.components[0].1, kind, self.n, atom_cap)?,
                SpectrumMode::Exact,
            )),
            SourceKind::FiniteMixture => match self.block_pmf(table_cap) {
                Ok(table) => Ok((
                    SpectrumDistribution::single_letter(&table, kind)?,
                    SpectrumMode::Exact,
                )),
                Err(Error::Resource { .. }) => {
                    let parts = self
                        .components
                        .iter()
                        .map(|(w, c)| block_spectrum(c, kind, self.n, atom_cap).map(|s| (*w, s)))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((SpectrumDistribution::mixture(&parts)?, SpectrumMode::ComponentMixture))
                }
                Err(e) => Err(e),
            },
        }
    }

    /// All `xⁿ` with `P(xⁿ, yⁿ) > 0` and `lo ≤ −log P(xⁿ|yⁿ) < hi`, in
    /// lexicographic order.
    pub fn candidates(&self, y: &[usize], lo: f64, hi: f64, cap: usize) -> Result<Vec<Vec<usize>>> {
        self.check_len(y)?;
        match self.kind {
            SourceKind::IidPower => iid_candidates(&self.components[0].1, y, lo, hi, cap),
            SourceKind::FiniteMixture => {
                let (nx, _, _) = self.alphabet_sizes();
                let total = (nx as u128).checked_pow(self.n as u32).unwrap_or(u128::MAX);
                if total > cap as u128 {
                    return Err(Error::resource(
                        "mixture candidate enumeration",
                        total,
                        cap as u128,
                        "raise the decode cap or shorten the block",
                    ));
                }
                let mut out = Vec::new();
                for idx in 0..total as usize {
                    let x = crate::prob::block_digits(idx, nx, self.n);
                    if let Ok(h) = self.cond_log_likelihood(&x, y) {
                        if in_window(h, lo, hi) {
                            out.push(x);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Index of a block sequence over the single-letter alphabet.
    pub fn sequence_index(&self, s: &[usize], alphabet: usize) -> usize {
        block_index(s, alphabet)
    }
}

/// `lo ≤ h < hi` with boundary snapping.
#[inline]
pub fn in_window(h: f64, lo: f64, hi: f64) -> bool {
    lo <= h + BOUNDARY_SNAP && h + BOUNDARY_SNAP < hi
}

/// Depth-first enumeration of `{xⁿ : lo ≤ −log Q(xⁿ|yⁿ) < hi}` for an IID
/// model `Q`. Per-symbol costs are nonnegative, so partial sums bound the
/// search from both sides.
pub fn iid_candidates(
    q: &JointPmf,
    y: &[usize],
    lo: f64,
    hi: f64,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    let (nx, ny, _) = q.sizes();
    if let Some(&bad) = y.iter().find(|&&s| s >= ny) {
        return Err(Error::usage(format!("y symbol {bad} outside alphabet")));
    }
    let n = y.len();
    // per position: (x, cost) sorted by x
    let costs: Vec<Vec<(usize, f64)>> = y
        .iter()
        .map(|&yi| {
            (0..nx)
                .filter(|&x| q.p_xy(x, yi) > 0.0)
                .map(|x| (x, -(q.p_xy(x, yi) / q.p_y(yi)).log2()))
                .collect()
        })
        .collect();
    if costs.iter().any(|c| c.is_empty()) {
        return Ok(Vec::new());
    }
    let mut min_suffix = vec![0.0; n + 1];
    let mut max_suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        let (mn, mx) = costs[i]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| (a.min(c.1), b.max(c.1)));
        min_suffix[i] = min_suffix[i + 1] + mn;
        max_suffix[i] = max_suffix[i + 1] + mx;
    }
    let mut search = Search {
        costs: &costs,
        min_suffix: &min_suffix,
        max_suffix: &max_suffix,
        lo,
        hi,
        cap,
        node_cap: (cap as u128).saturating_mul(64).max(1 << 16),
        visited: 0,
        prefix: Vec::with_capacity(n),
        out: Vec::new(),
    };
    search.descend(0.0)?;
    Ok(search.out)
}

struct Search<'a> {
    costs: &'a [Vec<(usize, f64)>],
    min_suffix: &'a [f64],
    max_suffix: &'a [f64],
    lo: f64,
    hi: f64,
    cap: usize,
    node_cap: u128,
    visited: u128,
    prefix: Vec<usize>,
    out: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn descend(&mut self, partial: f64) -> Result<()> {
        let i = self.prefix.len();
        if i == self.costs.len() {
            if in_window(partial, self.lo, self.hi) {
                if self.out.len() == self.cap {
                    return Err(Error::resource(
                        "decoder candidates",
                        self.cap as u128 + 1,
                        self.cap as u128,
                        "raise the decode cap or shorten the block",
                    ));
                }
                self.out.push(self.prefix.clone());
            }
            return Ok(());
        }
        for &(x, c) in &self.costs[i] {
            self.visited += 1;
            if self.visited > self.node_cap {
                return Err(Error::resource(
                    "decoder search nodes",
                    self.visited,
                    self.node_cap,
                    "raise the decode cap or shorten the block",
                ));
            }
            let p = partial + c;
            if p + self.min_suffix[i + 1] + BOUNDARY_SNAP >= self.hi
                || p + self.max_suffix[i + 1] + BOUNDARY_SNAP < self.lo
            {
                continue;
            }
            self.prefix.push(x);
            self.descend(p)?;
            self.prefix.pop();
        }
        Ok(())
    }
}
