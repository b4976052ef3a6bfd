//! The Kolmogorov distribution (law of the supremum of a standard Brownian
//! bridge) and uniform FCP bands.

use super::tau;
use crate::error::{check_probability_open, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SERIES_TERM_TOL: f64 = 1e-12;

/// `K(x) = 1 - 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)` for `x > 0`, else 0.
///
/// The alternating series is summed until the next term drops below 1e-12.
/// For small `x`, where it converges slowly and cancels badly, the equivalent
/// theta-function form `sqrt(2 pi)/x sum_k exp(-(2k-1)^2 pi^2 / (8 x^2))` is
/// used instead.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return 0.0;
    }
    if x < 0.6 {
        let c = PI * PI / (8.0 * x * x);
        let mut sum = 0.0;
        for k in 1..200 {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * c).exp();
            sum += term;
            if term < SERIES_TERM_TOL * sum.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        return ((2.0 * PI).sqrt() / x * sum).min(1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..1000 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        if term < SERIES_TERM_TOL {
            break;
        }
        sum += sign * term;
        sign = -sign;
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// Inverse of [`kolmogorov_cdf`] by bisection.
pub fn kolmogorov_quantile(p: f64) -> Result<f64> {
    check_probability_open("p", p)?;
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Uniform band half-widths for `||FCP - I_n||_inf` at confidence `1 - delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformBand {
    pub tau: f64,
    pub sigma2: f64,
    /// Kolmogorov quantile over `sqrt(tau)`.
    pub asymptotic_halfwidth: f64,
    /// `sqrt(ln(2/delta) / (2 tau))`, a DKW-type bound.
    pub dkw_halfwidth: f64,
}

pub fn fcp_uniform_band(n: usize, m: usize, delta: f64) -> Result<UniformBand> {
    check_probability_open("delta", delta)?;
    let t = tau(n, m)?;
    Ok(UniformBand {
        tau: t,
        sigma2: n as f64 / (n + m) as f64,
        asymptotic_halfwidth: kolmogorov_quantile(1.0 - delta)? / t.sqrt(),
        dkw_halfwidth: ((2.0 / delta).ln() / (2.0 * t)).sqrt(),
    })
}
