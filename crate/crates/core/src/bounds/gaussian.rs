//! Standard Gaussian tail and its inverse.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// `Q(a) = P[N(0,1) > a]`.
pub fn gaussian_q(a: f64) -> f64 {
    0.5 * erfc(a / std::f64::consts::SQRT_2)
}

fn density(a: f64) -> f64 {
    (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Q⁻¹(p)` for `p ∈ (0, 1)`: bisection to a bracket, then Newton steps.
pub fn gaussian_q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("Q⁻¹ needs p in (0, 1), got {p}")));
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gaussian_q(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let mut a = 0.5 * (lo + hi);
    for _ in 0..50 {
        let f = gaussian_q(a) - p;
        let d = density(a);
        if d == 0.0 {
            break;
        }
        let step = f / d;
        let next = (a + step).clamp(lo - 1e-6, hi + 1e-6);
        if (next - a).abs() < 1e-15 * a.abs().max(1.0) {
            a = next;
            break;
        }
        a = next;
    }
    Ok(a)
}
