//! Inference from the limit curves: pointwise FCP intervals, the asymptotic
//! BH threshold and FDP/TDP limit moments.

use super::theory::{TheoryFunctions, CURVE_EPS};
use super::AsymptoticRegime;
use crate::error::{check_probability_open, Error, Result};
use crate::numerics::std_normal_quantile;
use serde::{Deserialize, Serialize};

/// Gaussian interval for `FCP(alpha)` (weighted or not).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcpInterval {
    pub alpha: f64,
    pub level: f64,
    pub mean: f64,
    /// Variance of `FCP(alpha)` itself, i.e. the limit variance over `tau`.
    pub variance: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Asymptotic interval for the (weighted) FCP at `alpha`:
/// mean `G^w(alpha)`, variance
/// `[s2 G^w (1 - G^w) + (1 - s2) rho^2 (G^w)'^2 (I^w (1 - I^w) + (alpha - I^w)^2)] / tau`.
pub fn fcp_pointwise_ci(
    alpha: f64,
    level: f64,
    regime: &AsymptoticRegime,
    theory: &TheoryFunctions,
) -> Result<FcpInterval> {
    check_probability_open("alpha", alpha)?;
    check_probability_open("level", level)?;
    let s2 = regime.sigma2;
    let gw = theory.gw(alpha);
    let d = theory.gw_prime(alpha);
    let iw = theory.iw(alpha);
    let rho = theory.rho_w();
    let scaled = s2 * gw * (1.0 - gw)
        + (1.0 - s2) * rho * rho * d * d * (iw * (1.0 - iw) + (alpha - iw).powi(2));
    let variance = scaled / regime.tau;
    let half = std_normal_quantile(0.5 * (1.0 + level)) * variance.sqrt();
    Ok(FcpInterval {
        alpha,
        level,
        mean: gw,
        variance,
        lo: gw - half,
        hi: gw + half,
    })
}

/// `1 / G_mixt'(0+)`: below this level BH asymptotically rejects nothing.
pub fn critical_alpha(theory: &TheoryFunctions, weighted: bool) -> Result<f64> {
    Ok(1.0 / theory.mixture_slope_at_zero(weighted)?)
}

/// `T_alpha = sup{t : G_mixt(t) >= t / alpha}` (or the weighted analogue),
/// by bisection on `[CURVE_EPS, alpha]`.
pub fn bh_asymptotic_threshold(
    alpha: f64,
    theory: &TheoryFunctions,
    weighted: bool,
) -> Result<f64> {
    check_probability_open("alpha", alpha)?;
    let critical = critical_alpha(theory, weighted)?;
    let h = |t: f64| -> Result<f64> { Ok(theory.mixture(t, weighted)? - t / alpha) };
    let (mut lo, mut hi) = (CURVE_EPS, alpha);
    if alpha <= critical || h(lo)? <= 0.0 {
        return Err(Error::Subcritical { alpha, critical });
    }
    if h(hi)? >= 0.0 {
        return Ok(hi);
    }
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if h(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = lo;
    let resid = h(t)?.abs();
    if resid > 1e-8 {
        return Err(Error::AssumptionViolation(format!(
            "threshold equation residual {resid:e} at t = {t}; mixture curve is not concave here"
        )));
    }
    Ok(t)
}

/// Which FDP/TDP limit to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMode {
    /// Plain conformal p-values, null law equal to the calibration law.
    Unweighted,
    /// Weighted p-values with the oracle weight for the null law
    /// (`G_0^w` is the identity).
    OracleWeighted,
    /// Any bounded weight (or none), any null law.
    GeneralWeighted,
}

/// Limit means and `tau`-scaled variances of the FDP and TDP of BH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhMoments {
    pub mode: MomentMode,
    pub alpha: f64,
    pub sigma2: f64,
    pub threshold: f64,
    pub fdp_mean: f64,
    pub fdp_var_scaled: f64,
    pub tdp_mean: f64,
    pub tdp_var_scaled: f64,
}

pub fn fdp_tdp_asymptotics(
    alpha: f64,
    regime: &AsymptoticRegime,
    theory: &TheoryFunctions,
    mode: MomentMode,
) -> Result<BhMoments> {
    check_probability_open("alpha", alpha)?;
    let s2 = regime.sigma2;
    let pi0 = theory.pi0()?;
    let (threshold, fdp_mean, fdp_var, tdp_mean, tdp_var) = match mode {
        MomentMode::Unweighted => {
            let sc = theory.scenario();
            if sc.null_dist != Some(sc.cal) {
                return Err(Error::AssumptionViolation(
                    "unweighted FDP/TDP limits need the null law to equal the calibration law"
                        .into(),
                ));
            }
            let t = bh_asymptotic_threshold(alpha, theory, false)?;
            let g = theory.g(t);
            let gp = theory.g_prime(t);
            let fdp_var = alpha * alpha * pi0 * (s2 + (1.0 - s2) * pi0) * (1.0 - t) / t;
            let sigma = gp * gp * t * (1.0 - t) * (pi0 * s2 + (1.0 - s2) / (alpha * alpha))
                + (1.0 / alpha - pi0).powi(2) / (1.0 - pi0) * g * (1.0 - g) * s2;
            let d = 1.0 / alpha - theory.gmixt_prime(t)?;
            (t, pi0 * alpha, fdp_var, g, sigma / (d * d))
        }
        MomentMode::OracleWeighted => {
            for k in 1..10 {
                let u = k as f64 / 10.0;
                let dev = (theory.g0w(u)? - u).abs();
                if dev > 1e-6 {
                    return Err(Error::AssumptionViolation(format!(
                        "weight is not the oracle for the null law: G_0^w({u}) - {u} = {dev:e}"
                    )));
                }
            }
            let t = bh_asymptotic_threshold(alpha, theory, true)?;
            let g = theory.gw(t);
            let gp = theory.gw_prime(t);
            let iw = theory.iw(t);
            let rho2 = theory.rho_w().powi(2);
            let xi = s2 + (1.0 - s2) * rho2 * pi0 * (iw / t + t - 2.0 * iw) / (1.0 - t);
            let fdp_var = alpha * alpha * pi0 * xi * (1.0 - t) / t;
            // variance of V(I^w(t)) + (t - I^w(t)) N is I^w + t^2 - 2 t I^w
            let sigma = gp * gp * t * (1.0 - t) * pi0 * s2
                + (gp / alpha).powi(2) * rho2 * (iw + t * t - 2.0 * t * iw) * (1.0 - s2)
                + (1.0 / alpha - pi0).powi(2) / (1.0 - pi0) * g * (1.0 - g) * s2;
            let d = 1.0 / alpha - theory.gmixtw_prime(t)?;
            (t, pi0 * alpha, fdp_var, g, sigma / (d * d))
        }
        MomentMode::GeneralWeighted => {
            let t = bh_asymptotic_threshold(alpha, theory, true)?;
            let g0 = theory.g0w(t)?;
            let g0p = theory.g0w_prime(t)?;
            let g1 = theory.gw(t);
            let g1p = theory.gw_prime(t);
            let gm = theory.gmixtw(t)?;
            let d = 1.0 / alpha - theory.gmixtw_prime(t)?;
            let iw = theory.iw(t);
            let rho2 = theory.rho_w().powi(2);
            let vm = iw * (1.0 - iw) + (t - iw).powi(2);

            let p = pi0 * g0 / gm;
            let zeta = 1.0 - (1.0 - pi0) * (g0p * g1 - g0 * g1p) / (d * g0);
            // limit = a Z_0 + b Z_1 with Z_0, Z_1 sharing the calibration term
            let quad = |a: f64, b: f64| {
                a * a * s2 / pi0 * g0 * (1.0 - g0)
                    + b * b * s2 / (1.0 - pi0) * g1 * (1.0 - g1)
                    + (a * g0p + b * g1p).powi(2) * rho2 * (1.0 - s2) * vm
            };
            let fdp_var = quad(p * (1.0 - p * zeta) / g0, -p * (1.0 - p) * zeta / g1);
            let tdp_var = quad(pi0 * g1p / d, (1.0 - pi0) * g1p / d + 1.0);
            (t, p, fdp_var, g1, tdp_var)
        }
    };
    Ok(BhMoments {
        mode,
        alpha,
        sigma2: s2,
        threshold,
        fdp_mean,
        fdp_var_scaled: fdp_var,
        tdp_mean,
        tdp_var_scaled: tdp_var,
    })
}
