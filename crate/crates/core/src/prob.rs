//! Exact finite-alphabet probability.
//!
//! Joint tables over `X × Y × Z`, information densities, total variation,
//! maximal couplings and the moment functionals that drive every bound in
//! the crate. All logarithms are base 2, so every density is in bits.
//!
//! Densities are only defined on the support: asking for one at a cell of
//! zero mass is a [`Error::Domain`].

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Deviation of the total mass from 1 accepted at construction. Accepted
/// tables are renormalized, so stored tables sum to 1 within `1e-12`.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A distribution over `{0, …, n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    p: Vec<f64>,
}

impl Pmf {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        Ok(Self {
            p: validated(p, "pmf")?,
        })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over an empty set");
        Self {
            p: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut p = vec![0.0; n];
        p[at] = 1.0;
        Self { p }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, i: usize) -> f64 {
        self.p[i]
    }

    /// Push the distribution through a stochastic map given as rows
    /// `channel[u][v] = W(v | u)`.
    pub fn push_forward(&self, channel: &[Vec<f64>]) -> Result<Pmf> {
        if channel.len() != self.len() {
            return Err(Error::usage(format!(
                "channel has {} rows for a pmf over {} points",
                channel.len(),
                self.len()
            )));
        }
        let out_len = channel.first().map_or(0, Vec::len);
        let mut out = vec![0.0; out_len];
        for (pu, row) in self.p.iter().zip(channel) {
            if row.len() != out_len {
                return Err(Error::usage("ragged channel matrix"));
            }
            for (o, w) in out.iter_mut().zip(row) {
                *o += pu * w;
            }
        }
        Pmf::new(out)
    }
}

fn validated(mut p: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if p.is_empty() {
        return Err(Error::usage(format!("{what}: empty table")));
    }
    if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::usage(format!("{what}: invalid probability {bad}")));
    }
    let total: f64 = NeumaierSum::total(p.iter().copied());
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::usage(format!(
            "{what}: probabilities sum to {total}, deviation exceeds {SUM_TOLERANCE}"
        )));
    }
    if total != 1.0 {
        p.iter_mut().for_each(|v| *v /= total);
    }
    Ok(p)
}

/// Half-L1 distance `½ Σ |P(u) − Q(u)|`.
pub fn tv_distance(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::usage(format!(
            "total variation between alphabets of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    let sum = NeumaierSum::total(p.p.iter().zip(&q.p).map(|(a, b)| (a - b).abs()));
    Ok((0.5 * sum).min(1.0))
}

/// Joint law on pairs `(u, v)` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    n: usize,
    mass: Vec<f64>,
}

impl Coupling {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.mass[u * self.n + v]
    }

    pub fn first_marginal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|u| NeumaierSum::total((0..self.n).map(|v| self.get(u, v))))
            .collect()
    }

    pub fn second_marginal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|v| NeumaierSum::total((0..self.n).map(|u| self.get(u, v))))
            .collect()
    }

    /// `Pr[U ≠ V]` under the coupling.
    pub fn mismatch_probability(&self) -> f64 {
        let mut acc = NeumaierSum::default();
        for u in 0..self.n {
            for v in 0..self.n {
                if u != v {
                    acc.add(self.get(u, v));
                }
            }
        }
        acc.value()
    }
}

/// Maximal coupling of `P` and `Q`: the overlap `min(P, Q)` sits on the
/// diagonal and the two residuals are coupled as a product, so the
/// off-diagonal mass equals `tv_distance(P, Q)`.
pub fn maximal_coupling(p: &Pmf, q: &Pmf) -> Result<Coupling> {
    if p.len() != q.len() {
        return Err(Error::usage(format!(
            "coupling of alphabets of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    let n = p.len();
    let mut mass = vec![0.0; n * n];
    let resid_p: Vec<f64> = p.p.iter().zip(&q.p).map(|(a, b)| (a - b).max(0.0)).collect();
    let resid_q: Vec<f64> = p.p.iter().zip(&q.p).map(|(a, b)| (b - a).max(0.0)).collect();
    for u in 0..n {
        mass[u * n + u] = p.p[u].min(q.p[u]);
    }
    let total_q = NeumaierSum::total(resid_q.iter().copied());
    if total_q > 0.0 {
        // resid_p and resid_q have disjoint supports, so no product term lands
        // on the diagonal.
        for (u, rp) in resid_p.iter().enumerate().filter(|(_, r)| **r > 0.0) {
            for (v, rq) in resid_q.iter().enumerate().filter(|(_, r)| **r > 0.0) {
                mass[u * n + v] = rp * rq / total_q;
            }
        }
    }
    Ok(Coupling { n, mass })
}

/// A two-dimensional table `P(a, b)`, used for `P_XZ`, `Q_XY` and friends.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPmf {
    na: usize,
    nb: usize,
    p: Vec<f64>,
}

impl PairPmf {
    pub fn new(na: usize, nb: usize, p: Vec<f64>) -> Result<Self> {
        if na * nb != p.len() {
            return Err(Error::usage(format!(
                "pair table of {} entries for a {na}×{nb} alphabet",
                p.len()
            )));
        }
        Ok(Self {
            na,
            nb,
            p: validated(p, "pair pmf")?,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.na, self.nb)
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.p[a * self.nb + b]
    }

    pub fn table(&self) -> &[f64] {
        &self.p
    }

    pub fn marginal_b(&self) -> Pmf {
        let mut out = vec![0.0; self.nb];
        for a in 0..self.na {
            for (b, o) in out.iter_mut().enumerate() {
                *o += self.get(a, b);
            }
        }
        Pmf { p: out }
    }

    pub fn marginal_a(&self) -> Pmf {
        Pmf {
            p: (0..self.na)
                .map(|a| (0..self.nb).map(|b| self.get(a, b)).sum())
                .collect(),
        }
    }
}

/// Conditional min-entropy `H_min(P_XZ | Q_Z) = −log max P(x,z)/Q(z)` over
/// cells with `Q(z) > 0`.
pub fn min_entropy_cond(p_xz: &PairPmf, q_z: &Pmf) -> Result<f64> {
    if q_z.len() != p_xz.nb {
        return Err(Error::usage("Q_Z alphabet does not match P_XZ"));
    }
    let p_z = p_xz.marginal_b();
    for z in 0..p_xz.nb {
        if p_z.get(z) > 0.0 && q_z.get(z) <= 0.0 {
            return Err(Error::domain(format!(
                "supp(P_Z) not contained in supp(Q_Z): z = {z}"
            )));
        }
    }
    let mut best = 0.0f64;
    for x in 0..p_xz.na {
        for z in 0..p_xz.nb {
            if q_z.get(z) > 0.0 {
                best = best.max(p_xz.get(x, z) / q_z.get(z));
            }
        }
    }
    Ok(-best.log2())
}

/// Exact distribution `p(x, y, z)` over `X × Y × Z`, stored x-major then y
/// then z. Marginals are cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    nx: usize,
    ny: usize,
    nz: usize,
    p: Vec<f64>,
    px: Vec<f64>,
    py: Vec<f64>,
    pz: Vec<f64>,
    pxy: Vec<f64>,
    pxz: Vec<f64>,
    pyz: Vec<f64>,
}

impl JointPmf {
    pub fn new(nx: usize, ny: usize, nz: usize, p: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::usage("alphabet sizes must be positive"));
        }
        if p.len() != nx * ny * nz {
            return Err(Error::usage(format!(
                "table has {} entries, expected {nx}·{ny}·{nz} = {}",
                p.len(),
                nx * ny * nz
            )));
        }
        let p = validated(p, "joint pmf")?;
        let mut out = Self {
            nx,
            ny,
            nz,
            px: vec![0.0; nx],
            py: vec![0.0; ny],
            pz: vec![0.0; nz],
            pxy: vec![0.0; nx * ny],
            pxz: vec![0.0; nx * nz],
            pyz: vec![0.0; ny * nz],
            p,
        };
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    let v = out.p[(x * ny + y) * nz + z];
                    out.px[x] += v;
                    out.py[y] += v;
                    out.pz[z] += v;
                    out.pxy[x * ny + y] += v;
                    out.pxz[x * nz + z] += v;
                    out.pyz[y * nz + z] += v;
                }
            }
        }
        Ok(out)
    }

    /// Build from a pair table `p(x, y)` with a constant eavesdropper.
    pub fn from_xy(nx: usize, ny: usize, p: Vec<f64>) -> Result<Self> {
        Self::new(nx, ny, 1, p)
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn table(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize, z: usize) -> f64 {
        self.p[(x * self.ny + y) * self.nz + z]
    }

    #[inline]
    pub fn p_x(&self, x: usize) -> f64 {
        self.px[x]
    }

    #[inline]
    pub fn p_y(&self, y: usize) -> f64 {
        self.py[y]
    }

    #[inline]
    pub fn p_z(&self, z: usize) -> f64 {
        self.pz[z]
    }

    #[inline]
    pub fn p_xy(&self, x: usize, y: usize) -> f64 {
        self.pxy[x * self.ny + y]
    }

    #[inline]
    pub fn p_xz(&self, x: usize, z: usize) -> f64 {
        self.pxz[x * self.nz + z]
    }

    #[inline]
    pub fn p_yz(&self, y: usize, z: usize) -> f64 {
        self.pyz[y * self.nz + z]
    }

    pub fn marginal_x(&self) -> Pmf {
        Pmf { p: self.px.clone() }
    }

    pub fn marginal_z(&self) -> Pmf {
        Pmf { p: self.pz.clone() }
    }

    pub fn marginal_xy(&self) -> PairPmf {
        PairPmf {
            na: self.nx,
            nb: self.ny,
            p: self.pxy.clone(),
        }
    }

    pub fn marginal_xz(&self) -> PairPmf {
        PairPmf {
            na: self.nx,
            nb: self.nz,
            p: self.pxz.clone(),
        }
    }

    /// Flattened table as a [`Pmf`] over triples, same ordering as [`table`](Self::table).
    pub fn as_pmf(&self) -> Pmf {
        Pmf { p: self.p.clone() }
    }

    /// Support cells `(x, y, z, p)` with positive mass.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        (0..self.nx).flat_map(move |x| {
            (0..self.ny).flat_map(move |y| {
                (0..self.nz).filter_map(move |z| {
                    let v = self.prob(x, y, z);
                    (v > 0.0).then_some((x, y, z, v))
                })
            })
        })
    }

    /// `log₂ [p(x,y|z) / (p(x|z) p(y|z))]`.
    pub fn info_density(&self, x: usize, y: usize, z: usize) -> Result<f64> {
        let v = self.prob(x, y, z);
        if v <= 0.0 {
            return Err(Error::domain(format!(
                "information density at zero-probability triple (x={x}, y={y}, z={z})"
            )));
        }
        Ok(Self::cond_info_raw(v, self.p_z(z), self.p_xz(x, z), self.p_yz(y, z)))
    }

    #[inline]
    pub(crate) fn cond_info_raw(pxyz: f64, pz: f64, pxz: f64, pyz: f64) -> f64 {
        (pxyz * pz / (pxz * pyz)).log2()
    }

    /// `−log₂ p(x|y)`.
    pub fn cond_log_likelihood(&self, x: usize, y: usize) -> Result<f64> {
        let v = self.p_xy(x, y);
        if v <= 0.0 {
            return Err(Error::domain(format!(
                "conditional log-likelihood at zero joint mass (x={x}, y={y})"
            )));
        }
        Ok(-(v / self.p_y(y)).log2())
    }

    /// `i(x; y) = log₂ [p(x,y) / (p(x) p(y))]`.
    pub fn info_density_xy(&self, x: usize, y: usize) -> Result<f64> {
        let v = self.p_xy(x, y);
        if v <= 0.0 {
            return Err(Error::domain(format!("i(x;y) at zero mass (x={x}, y={y})")));
        }
        Ok((v / (self.p_x(x) * self.p_y(y))).log2())
    }

    /// `i(x; z) = log₂ [p(x,z) / (p(x) p(z))]`.
    pub fn info_density_xz(&self, x: usize, z: usize) -> Result<f64> {
        let v = self.p_xz(x, z);
        if v <= 0.0 {
            return Err(Error::domain(format!("i(x;z) at zero mass (x={x}, z={z})")));
        }
        Ok((v / (self.p_x(x) * self.p_z(z))).log2())
    }

    /// `−log₂ p(x)`.
    pub fn self_information(&self, x: usize) -> Result<f64> {
        let v = self.p_x(x);
        if v <= 0.0 {
            return Err(Error::domain(format!("−log p(x) at zero mass (x={x})")));
        }
        Ok(-v.log2())
    }

    /// Largest violation of `p(x,y,z) p(y) = p(x,y) p(y,z)`; zero for a
    /// Markov chain `X − Y − Z`.
    pub fn markov_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    let lhs = self.prob(x, y, z) * self.p_y(y);
                    let rhs = self.p_xy(x, y) * self.p_yz(y, z);
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        worst
    }

    pub fn is_markov(&self, tol: f64) -> bool {
        self.markov_violation() <= tol
    }

    /// Largest violation of `p(x,y,z) p(z) = p(x,z) p(y,z)`; zero when `X`
    /// and `Y` are conditionally independent given `Z`.
    pub fn conditional_dependence(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    let lhs = self.prob(x, y, z) * self.p_z(z);
                    let rhs = self.p_xz(x, z) * self.p_yz(y, z);
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        worst
    }

    /// `p(x|z) p(y|z) p(z)`: the conditionally independent surrogate used by
    /// the converse.
    pub fn conditional_product(&self) -> JointPmf {
        let mut q = vec![0.0; self.p.len()];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    let pz = self.p_z(z);
                    if pz > 0.0 {
                        q[(x * self.ny + y) * self.nz + z] = self.p_xz(x, z) * self.p_yz(y, z) / pz;
                    }
                }
            }
        }
        JointPmf::new(self.nx, self.ny, self.nz, q).expect("product of marginals is a pmf")
    }

    /// Whether all mass sits on a single `z`.
    pub fn z_is_constant(&self) -> bool {
        self.pz.iter().filter(|v| **v > 0.0).count() == 1
    }

    /// The `n`-fold IID power. Block symbols are indexed by their base-`|X|`
    /// digits, most significant first (see [`block_digits`]).
    pub fn iid_power(&self, n: usize, cap: u128) -> Result<JointPmf> {
        if n == 0 {
            return Err(Error::usage("blocklength must be at least 1"));
        }
        let cells = (self.p.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if cells > cap {
            return Err(Error::resource(
                format!("{n}-fold block table"),
                cells,
                cap,
                "use a smaller blocklength or Monte Carlo mode",
            ));
        }
        let mut cur = self.clone();
        for _ in 1..n {
            cur = cur.product(self);
        }
        Ok(cur)
    }

    /// Product of two independent sources, the left one providing the more
    /// significant digit.
    pub(crate) fn product(&self, other: &JointPmf) -> JointPmf {
        let (nx, ny, nz) = (self.nx * other.nx, self.ny * other.ny, self.nz * other.nz);
        let mut p = vec![0.0; nx * ny * nz];
        for (x1, y1, z1, a) in self.support() {
            for (x2, y2, z2, b) in other.support() {
                let x = x1 * other.nx + x2;
                let y = y1 * other.ny + y2;
                let z = z1 * other.nz + z2;
                p[(x * ny + y) * nz + z] = a * b;
            }
        }
        JointPmf::new(nx, ny, nz, p).expect("product of pmfs is a pmf")
    }

    /// Weighted block-level mixture of tables over a common alphabet.
    pub fn mixture(components: &[(f64, JointPmf)]) -> Result<JointPmf> {
        let first = components
            .first()
            .ok_or_else(|| Error::usage("mixture with no components"))?;
        let dims = first.1.sizes();
        let mut p = vec![0.0; first.1.p.len()];
        for (w, c) in components {
            if c.sizes() != dims {
                return Err(Error::usage("mixture components over different alphabets"));
            }
            for (o, v) in p.iter_mut().zip(&c.p) {
                *o += w * v;
            }
        }
        JointPmf::new(dims.0, dims.1, dims.2, p)
    }
}

/// Base-`base` digits of `index`, most significant first.
pub fn block_digits(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// Inverse of [`block_digits`].
pub fn block_index(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, d| acc * base + d)
}

/// Scalar functionals of the single-letter densities, all in bits.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DensityStats {
    /// `I(X ∧ Y | Z) = E[i(X;Y|Z)]`.
    pub mutual_info: f64,
    /// Central second moment of `i(X;Y|Z)`.
    pub variance: f64,
    /// Central third absolute moment of `i(X;Y|Z)`.
    pub third_abs_moment: f64,
    /// `Var[−log p(X|Y)]`.
    pub var_x_given_y: f64,
    /// `Var[−log p(X|Z)]`.
    pub var_x_given_z: f64,
    /// `H(X|Y) = E[−log p(X|Y)]`.
    pub entropy_x_given_y: f64,
}

/// Direct summation of every functional over the support.
pub fn density_stats(pmf: &JointPmf) -> DensityStats {
    let mut cells = Vec::new();
    for (x, y, z, v) in pmf.support() {
        let i = JointPmf::cond_info_raw(v, pmf.p_z(z), pmf.p_xz(x, z), pmf.p_yz(y, z));
        let h_xy = -(pmf.p_xy(x, y) / pmf.p_y(y)).log2();
        let h_xz = -(pmf.p_xz(x, z) / pmf.p_z(z)).log2();
        cells.push((v, i, h_xy, h_xz));
    }
    let mean = |f: &dyn Fn(&(f64, f64, f64, f64)) -> f64| {
        NeumaierSum::total(cells.iter().map(|c| c.0 * f(c)))
    };
    let mutual_info = mean(&|c| c.1);
    let h_xy = mean(&|c| c.2);
    let h_xz = mean(&|c| c.3);
    DensityStats {
        mutual_info,
        variance: mean(&|c| (c.1 - mutual_info).powi(2)),
        third_abs_moment: mean(&|c| (c.1 - mutual_info).abs().powi(3)),
        var_x_given_y: mean(&|c| (c.2 - h_xy).powi(2)),
        var_x_given_z: mean(&|c| (c.3 - h_xz).powi(2)),
        entropy_x_given_y: h_xy,
    }
}

/// Binary entropy in bits; `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// Binary convolution `a ∗ b = a(1−b) + (1−a)b`.
pub fn binary_convolution(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

/// Doubly symmetric source with eavesdropper: `Z` a uniform bit,
/// `Y = Z ⊕ B₀`, `X = Y ⊕ B₁` with `B₀ ~ Bern(α₀)`, `B₁ ~ Bern(α₁)`.
pub fn example1_pmf(alpha0: f64, alpha1: f64) -> Result<JointPmf> {
    for (name, a) in [("alpha0", alpha0), ("alpha1", alpha1)] {
        if !(a > 0.0 && a < 0.5) {
            return Err(Error::usage(format!("{name} = {a} must lie in (0, 1/2)")));
        }
    }
    let mut p = vec![0.0; 8];
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let b0 = if y == z { 1.0 - alpha0 } else { alpha0 };
                let b1 = if x == y { 1.0 - alpha1 } else { alpha1 };
                p[(x * 2 + y) * 2 + z] = 0.5 * b0 * b1;
            }
        }
    }
    JointPmf::new(2, 2, 2, p)
}

/// Closed forms for the doubly symmetric source, including the printed
/// `V_{X|Y}` expression kept only as a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Example1ClosedForms {
    pub mutual_info: f64,
    pub mu2: f64,
    pub mu3: f64,
    /// `Var[−log p(X|Y)]`, the value used everywhere.
    pub var_x_given_y: f64,
    /// `α₁(log α₁ − h)² + (1−α₁)(log(1−α₁) − h)²` as printed; its sign
    /// convention disagrees with the variance above.
    pub var_x_given_y_printed: f64,
}

impl Example1ClosedForms {
    pub fn new(alpha0: f64, alpha1: f64) -> Self {
        let c = binary_convolution(alpha0, alpha1);
        let h1 = binary_entropy(alpha1);
        let mi = binary_entropy(c) - h1;
        let terms = [
            (alpha0 * alpha1, (alpha1 / (1.0 - c)).log2()),
            ((1.0 - alpha0) * (1.0 - alpha1), ((1.0 - alpha1) / (1.0 - c)).log2()),
            ((1.0 - alpha0) * alpha1, (alpha1 / c).log2()),
            (alpha0 * (1.0 - alpha1), ((1.0 - alpha1) / c).log2()),
        ];
        let mu = |r: i32| terms.iter().map(|(w, v)| w * (v - mi).abs().powi(r)).sum::<f64>();
        let (l1, l0) = (alpha1.log2(), (1.0 - alpha1).log2());
        Self {
            mutual_info: mi,
            mu2: mu(2),
            mu3: mu(3),
            var_x_given_y: alpha1 * (-l1 - h1).powi(2) + (1.0 - alpha1) * (-l0 - h1).powi(2),
            var_x_given_y_printed: alpha1 * (l1 - h1).powi(2) + (1.0 - alpha1) * (l0 - h1).powi(2),
        }
    }

    /// Gap between the printed `V_{X|Y}` and the variance of `−log p(X|Y)`.
    pub fn var_x_given_y_discrepancy(&self) -> f64 {
        self.var_x_given_y_printed - self.var_x_given_y
    }
}
