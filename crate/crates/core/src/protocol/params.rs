use serde::Serialize;

use crate::bounds::second_order::{achievable_lambda, theta_prime_n, BerryEsseen};
use crate::bounds::theorems::corollary1_gamma;
use crate::error::{Error, Result};
use crate::prob::{density_stats, JointPmf};
use crate::reconciliation::SliceSpec;

use super::{SessionConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem4Params {
    pub config: SessionConfig,
    pub n: u64,
    /// `λ = nI − √(nV) Q⁻¹(ε+δ−θ′_n) − Δ`.
    pub lambda: f64,
    pub theta_prime: f64,
    /// `λ − (11/2) log n` before flooring.
    pub key_length: f64,
}

/// Session configuration from the second-order achievability argument:
/// `L = n` slices of width `Δ` centred on `nH(X|Y)`, key length
/// `⌊λ − (11/2) log n⌋` and `γ` equalizing the hashing and union terms of the secrecy condition.
pub fn params_from_theorem4(pmf: &JointPmf, n: u64, eps: f64, delta: f64, width: f64) -> Result<Theorem4Params> {
    let stats = density_stats(pmf);
    let total = eps + delta;
    if !(eps >= 0.0 && delta >= 0.0 && total < 1.0) {
        return Err(Error::usage(format!("need ε, δ ≥ 0 and ε+δ < 1, got {eps}, {delta}")));
    }
    let lambda = achievable_lambda(&stats, n, total, width, BerryEsseen::Printed)?;
    let logn = (n as f64).log2();
    let key_length = lambda - 5.5 * logn;
    let key_of = |m: u64| {
        achievable_lambda(&stats, m, total, width, BerryEsseen::Printed)
            .map(|l| l - 5.5 * (m as f64).log2())
            .unwrap_or(f64::NEG_INFINITY)
    };
    if key_length < 1.0 {
        let mut m = n.max(1);
        while key_of(m) < 1.0 && m < 1 << 50 {
            m *= 2;
        }
        let (mut lo, mut hi) = (m / 2, m);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if key_of(mid) >= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Err(Error::infeasible(
            format!("key length {key_length:.3} bits at n = {n} is below one bit"),
            (key_of(hi) >= 1.0).then_some(hi),
        ));
    }
    let h = stats.entropy_x_given_y;
    let nf = n as f64;
    let slices = SliceSpec::with_count(nf * (h - width / 2.0), width, n as usize)?;
    let key_bits = key_length.floor() as usize;
    let gamma = corollary1_gamma(slices.count(), key_bits, lambda);
    let config = SessionConfig::new(slices, gamma, lambda, key_bits, Variant::P1)?;
    Ok(Theorem4Params {
        config,
        n,
        lambda,
        theta_prime: theta_prime_n(&stats, n, width, BerryEsseen::Printed),
        key_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::second_order::achievable_length;
    use crate::prob::example1_pmf;

    #[test]
    fn matches_lower_curve() {
        let pmf = example1_pmf(0.25, 0.125).unwrap();
        let p = params_from_theorem4(&pmf, 10_000, 0.025, 0.025, 1.0).unwrap();
        let curve = achievable_length(&density_stats(&pmf), 10_000, 0.05, 1.0, BerryEsseen::Printed).unwrap();
        assert_eq!(p.config.key_bits, curve.floor() as usize);
        assert_eq!(p.config.slices.count(), 10_000);
        assert!((p.config.slices.lambda_max() - 1e4 * (density_stats(&pmf).entropy_x_given_y + 0.5)).abs() < 1e-6);
        assert!(p.config.gamma > 0.0);
    }

    #[test]
    fn rate_approaches_capacity() {
        let pmf = example1_pmf(0.25, 0.125).unwrap();
        let p = params_from_theorem4(&pmf, 1_000_000, 0.05, 0.05, 1.0).unwrap();
        let i = density_stats(&pmf).mutual_info;
        assert!((p.config.key_bits as f64 / 1e6 - i).abs() < 0.01);
    }

    #[test]
    fn tiny_n_is_infeasible() {
        let pmf = example1_pmf(0.25, 0.125).unwrap();
        match params_from_theorem4(&pmf, 50, 0.025, 0.025, 1.0) {
            Err(Error::Infeasible { min_n: Some(m), .. }) => {
                assert!(params_from_theorem4(&pmf, m, 0.025, 0.025, 1.0).is_ok());
                assert!(params_from_theorem4(&pmf, m - 1, 0.025, 0.025, 1.0).is_err());
            }
            other => panic!("{other:?}"),
        }
    }
}
