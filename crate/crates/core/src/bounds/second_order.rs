//! Second-order key-length bounds and curve export.

use serde::Serialize;

use super::gaussian::gaussian_q_inv;
use crate::error::{Error, Result};
use crate::prob::DensityStats;

/// Form of the Berry-Esseen remainder inside `θ_n` and `θ′_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BerryEsseen {
    /// `T³ / (2 V^{3/2} √n)` with `T` the third absolute central moment.
    Printed,
    /// `0.56 T / (V^{3/2} √n)`; diagnostics only.
    Standard,
}

impl BerryEsseen {
    fn term(self, stats: &DensityStats, n: f64) -> f64 {
        let t = stats.third_abs_moment;
        let v15 = stats.variance.powf(1.5);
        match self {
            BerryEsseen::Printed => t.powi(3) / (2.0 * v15 * n.sqrt()),
            BerryEsseen::Standard => 0.56 * t / (v15 * n.sqrt()),
        }
    }
}

/// `θ_n = 2/√n + BE`.
pub fn theta_n(stats: &DensityStats, n: u64, be: BerryEsseen) -> f64 {
    let nf = n as f64;
    2.0 / nf.sqrt() + be.term(stats, nf)
}

/// `θ′_n = 8 V_{X|Y}/(nΔ²) + BE + 1/n + 3/(2√n)`.
pub fn theta_prime_n(stats: &DensityStats, n: u64, delta: f64, be: BerryEsseen) -> f64 {
    let nf = n as f64;
    8.0 * stats.var_x_given_y / (nf * delta * delta) + be.term(stats, nf) + 1.0 / nf + 1.5 / nf.sqrt()
}

fn check_stats(stats: &DensityStats) -> Result<()> {
    if !(stats.variance > 0.0) {
        return Err(Error::domain("information density has zero variance"));
    }
    Ok(())
}

fn check_total(eps_plus_delta: f64) -> Result<()> {
    if !(eps_plus_delta > 0.0 && eps_plus_delta < 1.0) {
        return Err(Error::usage(format!("ε+δ = {eps_plus_delta} must lie in (0, 1)")));
    }
    Ok(())
}

/// Smallest `n ≥ 1` with `ok(n)`, assuming `ok` is monotone in `n`.
fn smallest_n(ok: impl Fn(u64) -> bool) -> Option<u64> {
    let mut hi = 1u64;
    while !ok(hi) {
        if hi >= 1 << 50 {
            return None;
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Some(hi);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Converse: `nI − √(nV) Q⁻¹(ε+δ+θ_n) + (3/2) log n`.
pub fn converse_length(stats: &DensityStats, n: u64, eps_plus_delta: f64, be: BerryEsseen) -> Result<f64> {
    check_total(eps_plus_delta)?;
    check_stats(stats)?;
    if n == 0 {
        return Err(Error::usage("n must be at least 1"));
    }
    let arg = |n: u64| eps_plus_delta + theta_n(stats, n, be);
    let a = arg(n);
    if a >= 1.0 {
        return Err(Error::infeasible(
            format!("ε+δ+θ_n = {a} is not below 1 at n = {n}"),
            smallest_n(|m| arg(m) < 1.0),
        ));
    }
    let nf = n as f64;
    Ok(nf * stats.mutual_info - (nf * stats.variance).sqrt() * gaussian_q_inv(a)? + 1.5 * nf.log2())
}

/// Achievability: `nI − √(nV) Q⁻¹(ε+δ−θ′_n) − (11/2) log n − Δ`.
pub fn achievable_length(
    stats: &DensityStats,
    n: u64,
    eps_plus_delta: f64,
    delta: f64,
    be: BerryEsseen,
) -> Result<f64> {
    let lambda = achievable_lambda(stats, n, eps_plus_delta, delta, be)?;
    Ok(lambda - 5.5 * (n as f64).log2())
}

/// `λ = nI − √(nV) Q⁻¹(ε+δ−θ′_n) − Δ`, the threshold behind the
/// achievability bound.
pub fn achievable_lambda(
    stats: &DensityStats,
    n: u64,
    eps_plus_delta: f64,
    delta: f64,
    be: BerryEsseen,
) -> Result<f64> {
    check_total(eps_plus_delta)?;
    check_stats(stats)?;
    if n == 0 {
        return Err(Error::usage("n must be at least 1"));
    }
    let h = stats.entropy_x_given_y;
    if !(delta > 0.0 && delta < 2.0 * h) {
        return Err(Error::usage(format!("Δ = {delta} must lie in (0, 2H(X|Y)) = (0, {})", 2.0 * h)));
    }
    let arg = |n: u64| eps_plus_delta - theta_prime_n(stats, n, delta, be);
    let a = arg(n);
    if a <= 0.0 {
        return Err(Error::infeasible(
            format!("ε+δ−θ′_n = {a} is not positive at n = {n}"),
            smallest_n(|m| arg(m) > 0.0),
        ));
    }
    let nf = n as f64;
    Ok(nf * stats.mutual_info - (nf * stats.variance).sqrt() * gaussian_q_inv(a)? - delta)
}

/// One-way benchmark `nI − √(nV_{X|Y}) Q⁻¹(ε) − √(nV_{X|Z}) Q⁻¹(δ)`,
/// lower-order terms omitted.
pub fn remark5_length(stats: &DensityStats, n: u64, eps: f64, delta: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(nf * stats.mutual_info
        - (nf * stats.var_x_given_y).sqrt() * gaussian_q_inv(eps)?
        - (nf * stats.var_x_given_z).sqrt() * gaussian_q_inv(delta)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPoint {
    pub n: u64,
    pub lower_bits: f64,
    pub upper_bits: f64,
    pub lower_rate: f64,
    pub upper_rate: f64,
    pub capacity: f64,
    pub eps_plus_delta: f64,
    /// `;`-separated: `lower-infeasible`, `upper-infeasible`,
    /// `lower-clamped`, `upper-clamped`, `berry-esseen-standard`.
    pub mode_flags: String,
}

impl BoundPoint {
    pub fn compute(stats: &DensityStats, n: u64, eps_plus_delta: f64, delta: f64, be: BerryEsseen) -> Result<Self> {
        let mut flags = Vec::new();
        let mut settle = |r: Result<f64>, side: &str| -> Result<f64> {
            match r {
                Ok(v) if v < 0.0 => {
                    flags.push(format!("{side}-clamped"));
                    Ok(0.0)
                }
                Ok(v) => Ok(v),
                Err(Error::Infeasible { .. }) => {
                    flags.push(format!("{side}-infeasible"));
                    Ok(0.0)
                }
                Err(e) => Err(e),
            }
        };
        let lower = settle(achievable_length(stats, n, eps_plus_delta, delta, be), "lower")?;
        let upper = settle(converse_length(stats, n, eps_plus_delta, be), "upper")?;
        if be == BerryEsseen::Standard {
            flags.push("berry-esseen-standard".into());
        }
        let nf = n as f64;
        Ok(Self {
            n,
            lower_bits: lower,
            upper_bits: upper,
            lower_rate: lower / nf,
            upper_rate: upper / nf,
            capacity: stats.mutual_info,
            eps_plus_delta,
            mode_flags: flags.join(";"),
        })
    }

    pub fn feasible(&self) -> bool {
        !self.mode_flags.contains("infeasible")
    }
}

/// `{:.9e}`-free formatting with 9 significant digits.
pub fn sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let digits = 9 - 1 - v.abs().log10().floor() as i32;
    if (0..=17).contains(&digits) {
        format!("{:.*}", digits as usize, v)
    } else {
        format!("{v:.8e}")
    }
}

pub const CSV_HEADER: &str = "n,lower_bits,upper_bits,lower_rate,upper_rate,capacity,eps_plus_delta,mode_flags";

pub fn to_csv(points: &[BoundPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.n,
            sig9(p.lower_bits),
            sig9(p.upper_bits),
            sig9(p.lower_rate),
            sig9(p.upper_rate),
            sig9(p.capacity),
            p.eps_plus_delta,
            p.mode_flags
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{density_stats, example1_pmf};

    fn ex1() -> DensityStats {
        density_stats(&example1_pmf(0.25, 0.125).unwrap())
    }

    #[test]
    fn theta_prime_at_ten_thousand() {
        let s = ex1();
        // hand evaluation: 8·0.8620/10⁴ + 1.4530³/(2·0.7907^{1.5}·100) + 10⁻⁴ + 0.015
        let t = theta_prime_n(&s, 10_000, 1.0, BerryEsseen::Printed);
        let hand = 8.0 * 0.8620 / 1e4 + 1.4530f64.powi(3) / (2.0 * 0.7907f64.powf(1.5) * 100.0) + 1e-4 + 0.015;
        assert!((t - hand).abs() < 2e-4, "{t} vs {hand}");
    }

    #[test]
    fn rates_converge_at_one_million() {
        let s = ex1();
        for total in [0.01, 0.05, 0.1] {
            let p = BoundPoint::compute(&s, 1_000_000, total, 1.0, BerryEsseen::Printed).unwrap();
            assert!(p.feasible());
            assert!((p.lower_rate - s.mutual_info).abs() < 0.01);
            assert!((p.upper_rate - s.mutual_info).abs() < 0.01);
            assert!(p.lower_bits <= p.upper_bits);
        }
    }

    #[test]
    fn converse_monotone_in_total() {
        let s = ex1();
        let a = converse_length(&s, 10_000, 0.01, BerryEsseen::Printed).unwrap();
        let b = converse_length(&s, 10_000, 0.1, BerryEsseen::Printed).unwrap();
        assert!(a < b);
    }

    #[test]
    fn infeasible_small_n_reports_minimum() {
        let s = ex1();
        match achievable_length(&s, 100, 0.01, 1.0, BerryEsseen::Printed) {
            Err(Error::Infeasible { min_n: Some(m), .. }) => {
                assert!(m > 100);
                assert!(achievable_length(&s, m, 0.01, 1.0, BerryEsseen::Printed).is_ok());
                assert!(achievable_length(&s, m - 1, 0.01, 1.0, BerryEsseen::Printed).is_err());
            }
            other => panic!("{other:?}"),
        }
        let p = BoundPoint::compute(&s, 100, 0.01, 1.0, BerryEsseen::Printed).unwrap();
        assert_eq!(p.lower_bits, 0.0);
        assert!(p.mode_flags.contains("lower-infeasible"));
    }

    #[test]
    fn delta_range() {
        let s = ex1();
        let h2 = 2.0 * s.entropy_x_given_y;
        assert!(achievable_length(&s, 1_000_000, 0.1, h2 - 1e-9, BerryEsseen::Printed).is_ok());
        assert!(matches!(
            achievable_length(&s, 1_000_000, 0.1, h2 + 1e-9, BerryEsseen::Printed),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn remark5_symmetry() {
        let mut s = ex1();
        let a = remark5_length(&s, 100_000, 0.02, 0.07).unwrap();
        std::mem::swap(&mut s.var_x_given_y, &mut s.var_x_given_z);
        let b = remark5_length(&s, 100_000, 0.07, 0.02).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.352473789123), "0.352473789");
        assert_eq!(sig9(1234.56789012), "1234.56789");
        assert_eq!(sig9(0.0), "0");
    }
}
