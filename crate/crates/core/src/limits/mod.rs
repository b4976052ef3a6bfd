//! Large-sample theory: the rate `tau`, the Kolmogorov distribution, the
//! limit curves of a scenario and the inference built on them (uniform FCP
//! bands, pointwise FCP intervals, the asymptotic BH threshold and FDP/TDP
//! moments).

mod inference;
mod kolmogorov;
mod theory;

pub use inference::{
    bh_asymptotic_threshold, critical_alpha, fcp_pointwise_ci, fdp_tdp_asymptotics, BhMoments,
    FcpInterval, MomentMode,
};
pub use kolmogorov::{fcp_uniform_band, kolmogorov_cdf, kolmogorov_quantile, UniformBand};
pub use theory::{CurveMethod, TheoryFunctions, CURVE_EPS};

use crate::distributions::{DistributionSpec, WeightSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `tau = n m / (n + m)`.
pub fn tau(n: usize, m: usize) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::Domain(format!(
            "tau needs n, m >= 1, got n={n}, m={m}"
        )));
    }
    let (n, m) = (n as f64, m as f64);
    Ok(n * m / (n + m))
}

/// Sample sizes together with the derived rate and calibration share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRegime {
    pub n: usize,
    pub m: usize,
    pub tau: f64,
    /// `n / (n + m)`.
    pub sigma2: f64,
}

impl AsymptoticRegime {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let tau = tau(n, m)?;
        Ok(Self {
            n,
            m,
            tau,
            sigma2: n as f64 / (n + m) as f64,
        })
    }

    /// `tau / m`, which equals `sigma2`.
    pub fn tau_over_m(&self) -> f64 {
        self.tau / self.m as f64
    }
}

/// Distributions and weights defining a prediction or novelty problem.
///
/// Prediction: calibration scores from `cal`, test scores from `test`.
/// Novelty: test scores are a mixture of `null_dist` (share `pi0`) and `test`
/// (the alternatives).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub cal: DistributionSpec,
    pub test: DistributionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_dist: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi0: Option<f64>,
}

impl ScenarioSpec {
    pub fn prediction(cal: DistributionSpec, test: DistributionSpec) -> Self {
        Self {
            cal,
            test,
            null_dist: None,
            weight: None,
            pi0: None,
        }
    }

    pub fn novelty(
        cal: DistributionSpec,
        null_dist: DistributionSpec,
        alt: DistributionSpec,
        pi0: f64,
    ) -> Self {
        Self {
            cal,
            test: alt,
            null_dist: Some(null_dist),
            weight: None,
            pi0: Some(pi0),
        }
    }

    pub fn with_weight(mut self, w: WeightSpec) -> Self {
        self.weight = Some(w);
        self
    }

    pub fn is_novelty(&self) -> bool {
        self.null_dist.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        self.cal.validate()?;
        self.test.validate()?;
        if let Some(d) = &self.null_dist {
            d.validate()?;
        }
        match (self.null_dist.is_some(), self.pi0) {
            (true, Some(p)) if p > 0.0 && p < 1.0 => {}
            (true, Some(p)) => {
                return Err(Error::Configuration(format!(
                    "pi0 = {p} must lie in (0, 1)"
                )));
            }
            (true, None) => return Err(Error::Configuration("novelty scenario needs pi0".into())),
            (false, Some(_)) => {
                return Err(Error::Configuration("pi0 given without null_dist".into()));
            }
            (false, None) => {}
        }
        if let Some(w) = &self.weight {
            if w.sup_over(&self.cal).is_none() {
                return Err(Error::AssumptionViolation(format!(
                    "weight {w} is unbounded on the calibration support"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_examples() {
        assert_eq!(tau(2, 2).unwrap(), 1.0);
        assert!((tau(500, 1000).unwrap() - 1000.0 / 3.0).abs() < 1e-12);
        assert!((tau(1, 1_000_000_000).unwrap() - 1.0).abs() < 1e-8);
        assert!(tau(0, 5).is_err());
    }

    #[test]
    fn regime_identities() {
        let r = AsymptoticRegime::new(300, 700).unwrap();
        assert!((r.tau_over_m() - r.sigma2).abs() < 1e-15);
        assert!((r.tau / r.m as f64 + r.tau / r.n as f64 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scenario_validation() {
        let e1 = DistributionSpec::exponential(1.0).unwrap();
        let mut s = ScenarioSpec::novelty(e1, e1, e1, 0.8);
        assert!(s.validate().is_ok());
        s.pi0 = None;
        assert!(s.validate().is_err());
        let w = WeightSpec::with_w_inf(crate::WeightKind::ExpTilt { lambda: -1.0 }, 1.0).unwrap();
        let s = ScenarioSpec::prediction(e1, e1).with_weight(w);
        assert!(matches!(s.validate(), Err(Error::AssumptionViolation(_))));
    }
}
