//! Limit curves of a scenario.
//!
//! Everything is expressed in the calibration survival coordinate
//! `v = 1 - F_cal(x)`, where the weight becomes `omega(v) = w(F_cal^{-1}(1-v))`
//! on (0, 1). In that coordinate
//!
//! * `G(t) = S_test(x(t))` with `x(t) = F_cal^{-1}(1 - t)`,
//! * the weighted p-value of a score with survival `v` tends to
//!   `K(v) / K(1)`, `K(v) = int_0^v omega`, so `G^w(t) = S_test(x(v(t)))`
//!   with `v(t) = K^{-1}(t K(1))`,
//! * `I^w(t) = Q(v(t)) / Q(1)` with `Q(v) = int_0^v omega^2`, and
//!   `rho_w = sqrt(Q(1)) / K(1)`.
//!
//! When the test (or null) law is exponential against an exponential
//! calibration law, `S_test(x(v)) = v^beta`; when the weight is an
//! exponential tilt (or the exponential oracle ratio, or a constant),
//! `omega(v) = c v^gamma`. Those pairs get closed forms. Anything else goes
//! through tabulated quadrature of `omega` and `omega^2`.

use super::ScenarioSpec;
use crate::distributions::{DistributionSpec, WeightKind, WeightSpec};
use crate::error::{Error, Result};
use crate::numerics::CumulativeIntegral;

/// Curves are evaluated on `[CURVE_EPS, 1 - CURVE_EPS]`; arguments outside
/// are clamped.
pub const CURVE_EPS: f64 = 1e-9;

const QUAD_REL_TOL: f64 = 1e-13;
const FD_STEP: f64 = 1e-5;

/// How curves are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMethod {
    /// Closed forms where the scenario admits them, quadrature otherwise.
    Auto,
    /// Always quadrature and transport through the quantile functions.
    Quadrature,
}

type Integrand = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// `v -> S_target(F_cal^{-1}(1 - v))`.
enum Law {
    Power(f64),
    Transport(DistributionSpec),
}

impl Law {
    fn new(cal: &DistributionSpec, target: &DistributionSpec, method: CurveMethod) -> Self {
        if method == CurveMethod::Auto {
            if let Some(beta) = power_exponent(cal, target) {
                return Law::Power(beta);
            }
        }
        Law::Transport(*target)
    }

    fn value(&self, cal: &DistributionSpec, v: f64) -> f64 {
        match self {
            Law::Power(beta) => v.powf(*beta),
            Law::Transport(target) => target.sf(cal.isf(v)),
        }
    }

    /// Derivative in `v`: the density ratio `f_target / f_cal` at `x(v)`.
    fn slope(&self, cal: &DistributionSpec, v: f64) -> f64 {
        match self {
            Law::Power(beta) => beta * v.powf(beta - 1.0),
            Law::Transport(target) => {
                let x = cal.isf(v);
                target.pdf(x) / cal.pdf(x)
            }
        }
    }

    fn power(&self) -> Option<f64> {
        match self {
            Law::Power(b) => Some(*b),
            Law::Transport(_) => None,
        }
    }
}

fn power_exponent(cal: &DistributionSpec, target: &DistributionSpec) -> Option<f64> {
    if cal == target {
        return Some(1.0);
    }
    match (cal, target) {
        (
            DistributionSpec::Exponential { rate: rc },
            DistributionSpec::Exponential { rate: rt },
        ) => Some(rt / rc),
        _ => None,
    }
}

/// Exponent `gamma` with `omega(v) = c v^gamma`, when the weight has that form.
fn weight_power(cal: &DistributionSpec, w: &WeightSpec) -> Option<f64> {
    match (w.kind(), cal) {
        (WeightKind::Constant { c }, _) if *c > 0.0 => Some(0.0),
        (WeightKind::ExpTilt { lambda }, DistributionSpec::Exponential { rate })
            if *lambda >= 0.0 =>
        {
            Some(lambda / rate)
        }
        (WeightKind::OracleRatio { cal: c2, target }, _) if c2 == cal => {
            let beta = power_exponent(cal, target)?;
            // ratio is beta * v^(beta - 1) in the survival coordinate
            Some(beta - 1.0).filter(|g| *g >= 0.0)
        }
        _ => None,
    }
}

enum WeightMap {
    Power {
        gamma: f64,
    },
    Numeric {
        first: CumulativeIntegral<Integrand>,
        second: CumulativeIntegral<Integrand>,
        piecewise: bool,
    },
}

impl WeightMap {
    fn new(cal: &DistributionSpec, w: Option<&WeightSpec>, method: CurveMethod) -> Result<Self> {
        let w = match w {
            Some(w) => w.clone(),
            None => WeightSpec::constant(1.0)?,
        };
        if method == CurveMethod::Auto {
            if let Some(gamma) = weight_power(cal, &w) {
                return Ok(WeightMap::Power { gamma });
            }
        }
        let piecewise = w.is_piecewise_constant();
        let omega = {
            let (w, cal) = (w.clone(), *cal);
            move |v: f64| {
                // v = 0 would send the score to +inf, where eval returns w(+inf)
                let v = v.clamp(1e-300, 1.0f64.next_down());
                w.eval(cal.isf(v)).unwrap_or(f64::NAN)
            }
        };
        let omega2 = omega.clone();
        let first = CumulativeIntegral::new(Box::new(omega) as Integrand, QUAD_REL_TOL);
        let second = CumulativeIntegral::new(
            Box::new(move |v: f64| omega2(v).powi(2)) as Integrand,
            QUAD_REL_TOL,
        );
        let (k1, q1) = (first.total(), second.total());
        if !(k1.is_finite() && q1.is_finite()) {
            return Err(Error::AssumptionViolation(format!(
                "weight {w} is not integrable against the calibration law"
            )));
        }
        if k1 <= 0.0 {
            return Err(Error::Configuration(format!(
                "weight {w} vanishes almost everywhere on the calibration support"
            )));
        }
        Ok(WeightMap::Numeric {
            first,
            second,
            piecewise,
        })
    }

    fn v_of_t(&self, t: f64) -> f64 {
        match self {
            WeightMap::Power { gamma } => t.powf(1.0 / (gamma + 1.0)),
            WeightMap::Numeric { first, .. } => first.invert(t * first.total()),
        }
    }

    fn dv_dt(&self, t: f64, v: f64) -> f64 {
        match self {
            WeightMap::Power { gamma } => v / ((gamma + 1.0) * t),
            WeightMap::Numeric { first, .. } => first.total() / first.integrand(v),
        }
    }

    fn iw(&self, t: f64) -> f64 {
        match self {
            WeightMap::Power { gamma } => t.powf((2.0 * gamma + 1.0) / (gamma + 1.0)),
            WeightMap::Numeric { second, .. } => {
                let v = self.v_of_t(t);
                (second.eval(v) / second.total()).clamp(0.0, 1.0)
            }
        }
    }

    fn rho(&self) -> f64 {
        match self {
            WeightMap::Power { gamma } => (gamma + 1.0) / (2.0 * gamma + 1.0).sqrt(),
            WeightMap::Numeric { first, second, .. } => second.total().sqrt() / first.total(),
        }
    }

    /// `int_0^v omega / int_0^1 omega`.
    fn first_share(&self, v: f64) -> f64 {
        match self {
            WeightMap::Power { gamma } => v.powf(gamma + 1.0),
            WeightMap::Numeric { first, .. } => first.eval(v) / first.total(),
        }
    }

    fn second_share(&self, v: f64) -> f64 {
        match self {
            WeightMap::Power { gamma } => v.powf(2.0 * gamma + 1.0),
            WeightMap::Numeric { second, .. } => second.eval(v) / second.total(),
        }
    }

    fn piecewise(&self) -> bool {
        matches!(
            self,
            WeightMap::Numeric {
                piecewise: true,
                ..
            }
        )
    }

    fn gamma(&self) -> Option<f64> {
        match self {
            WeightMap::Power { gamma } => Some(*gamma),
            WeightMap::Numeric { .. } => None,
        }
    }
}

fn clamp_t(t: f64) -> f64 {
    t.clamp(CURVE_EPS, 1.0 - CURVE_EPS)
}

/// Five-point central difference, kept `10 h` away from the endpoints.
fn central_difference(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = FD_STEP;
    let t = t.clamp(10.0 * h, 1.0 - 10.0 * h);
    (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
}

/// The limit curves `G, G^w, I^w, rho_w, G_0, G_0^w, G_mixt, G_mixt^w` and
/// their derivatives for a scenario. Without a weight, the weighted curves
/// are those of the constant weight (so `G^w = G`, `I^w = I`, `rho_w = 1`).
pub struct TheoryFunctions {
    scenario: ScenarioSpec,
    test: Law,
    null: Option<Law>,
    weight: WeightMap,
}

impl std::fmt::Debug for TheoryFunctions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TheoryFunctions")
            .field("scenario", &self.scenario)
            .field("closed_form", &self.is_closed_form())
            .finish()
    }
}

impl TheoryFunctions {
    pub fn new(scenario: &ScenarioSpec) -> Result<Self> {
        Self::with_method(scenario, CurveMethod::Auto)
    }

    /// Forces the quadrature path even where closed forms exist.
    pub fn quadrature(scenario: &ScenarioSpec) -> Result<Self> {
        Self::with_method(scenario, CurveMethod::Quadrature)
    }

    pub fn with_method(scenario: &ScenarioSpec, method: CurveMethod) -> Result<Self> {
        scenario.validate()?;
        let cal = scenario.cal;
        Ok(Self {
            test: Law::new(&cal, &scenario.test, method),
            null: scenario
                .null_dist
                .as_ref()
                .map(|d| Law::new(&cal, d, method)),
            weight: WeightMap::new(&cal, scenario.weight.as_ref(), method)?,
            scenario: scenario.clone(),
        })
    }

    pub fn scenario(&self) -> &ScenarioSpec {
        &self.scenario
    }

    /// True when every curve is evaluated in closed form.
    pub fn is_closed_form(&self) -> bool {
        self.test.power().is_some()
            && self.null.as_ref().is_none_or(|l| l.power().is_some())
            && self.weight.gamma().is_some()
    }

    pub fn has_weight(&self) -> bool {
        self.scenario.weight.is_some()
    }

    pub fn pi0(&self) -> Result<f64> {
        self.scenario.pi0.ok_or_else(|| {
            Error::Configuration("scenario has no pi0 (novelty curves unavailable)".into())
        })
    }

    fn null_law(&self) -> Result<&Law> {
        self.null
            .as_ref()
            .ok_or_else(|| Error::Configuration("scenario has no null distribution".into()))
    }

    fn cal(&self) -> &DistributionSpec {
        &self.scenario.cal
    }

    fn unweighted(&self, law: &Law, t: f64) -> f64 {
        law.value(self.cal(), clamp_t(t))
    }

    fn unweighted_prime(&self, law: &Law, t: f64) -> f64 {
        law.slope(self.cal(), clamp_t(t))
    }

    fn weighted(&self, law: &Law, t: f64) -> f64 {
        let t = clamp_t(t);
        if let (Some(beta), Some(gamma)) = (law.power(), self.weight.gamma()) {
            return t.powf(beta / (gamma + 1.0));
        }
        law.value(self.cal(), self.weight.v_of_t(t))
    }

    fn weighted_prime(&self, law: &Law, t: f64) -> f64 {
        let t = clamp_t(t);
        if let (Some(beta), Some(gamma)) = (law.power(), self.weight.gamma()) {
            let e = beta / (gamma + 1.0);
            return e * t.powf(e - 1.0);
        }
        if self.weight.piecewise() {
            return central_difference(|s| self.weighted(law, s), t);
        }
        let v = self.weight.v_of_t(t);
        law.slope(self.cal(), v) * self.weight.dv_dt(t, v)
    }

    /// `G(t) = 1 - F_test(F_cal^{-1}(1 - t))`.
    pub fn g(&self, t: f64) -> f64 {
        self.unweighted(&self.test, t)
    }

    pub fn g_prime(&self, t: f64) -> f64 {
        self.unweighted_prime(&self.test, t)
    }

    /// `G^w(t) = 1 - F_test((F^w_cal)^{-1}(1 - t))`.
    pub fn gw(&self, t: f64) -> f64 {
        self.weighted(&self.test, t)
    }

    pub fn gw_prime(&self, t: f64) -> f64 {
        self.weighted_prime(&self.test, t)
    }

    /// c.d.f. of the weight-tilted calibration law, at a score `x`.
    pub fn fw_cal(&self, x: f64) -> f64 {
        1.0 - self.weight.first_share(self.cal().sf(x))
    }

    /// c.d.f. of the calibration law tilted by `w^2`, at a score `x`.
    pub fn vw_cal(&self, x: f64) -> f64 {
        1.0 - self.weight.second_share(self.cal().sf(x))
    }

    /// `I^w(t) = 1 - V^w_cal((F^w_cal)^{-1}(1 - t))`.
    pub fn iw(&self, t: f64) -> f64 {
        self.weight.iw(clamp_t(t))
    }

    /// `sqrt(E w^2) / E w` under the calibration law; at least 1.
    pub fn rho_w(&self) -> f64 {
        self.weight.rho()
    }

    pub fn g0(&self, t: f64) -> Result<f64> {
        Ok(self.unweighted(self.null_law()?, t))
    }

    pub fn g0_prime(&self, t: f64) -> Result<f64> {
        Ok(self.unweighted_prime(self.null_law()?, t))
    }

    pub fn g0w(&self, t: f64) -> Result<f64> {
        Ok(self.weighted(self.null_law()?, t))
    }

    pub fn g0w_prime(&self, t: f64) -> Result<f64> {
        Ok(self.weighted_prime(self.null_law()?, t))
    }

    /// `pi0 G_0 + (1 - pi0) G`.
    pub fn gmixt(&self, t: f64) -> Result<f64> {
        let p = self.pi0()?;
        Ok(p * self.g0(t)? + (1.0 - p) * self.g(t))
    }

    pub fn gmixt_prime(&self, t: f64) -> Result<f64> {
        let p = self.pi0()?;
        Ok(p * self.g0_prime(t)? + (1.0 - p) * self.g_prime(t))
    }

    /// `pi0 G_0^w + (1 - pi0) G^w`.
    pub fn gmixtw(&self, t: f64) -> Result<f64> {
        let p = self.pi0()?;
        Ok(p * self.g0w(t)? + (1.0 - p) * self.gw(t))
    }

    pub fn gmixtw_prime(&self, t: f64) -> Result<f64> {
        let p = self.pi0()?;
        Ok(p * self.g0w_prime(t)? + (1.0 - p) * self.gw_prime(t))
    }

    /// Mixture curve selected by `weighted`.
    pub fn mixture(&self, t: f64, weighted: bool) -> Result<f64> {
        if weighted {
            self.gmixtw(t)
        } else {
            self.gmixt(t)
        }
    }

    pub fn mixture_prime(&self, t: f64, weighted: bool) -> Result<f64> {
        if weighted {
            self.gmixtw_prime(t)
        } else {
            self.gmixt_prime(t)
        }
    }

    /// `G_mixt'(0+)` (or its weighted analogue); may be `+inf`.
    pub fn mixture_slope_at_zero(&self, weighted: bool) -> Result<f64> {
        let p = self.pi0()?;
        let null = self.null_law()?;
        let scale = match (weighted, self.weight.gamma()) {
            (false, _) => Some(1.0),
            (true, Some(g)) => Some(g + 1.0),
            (true, None) => None,
        };
        if let (Some(b0), Some(b1), Some(s)) = (null.power(), self.test.power(), scale) {
            let slope = |e: f64| {
                if e < 1.0 {
                    f64::INFINITY
                } else if e == 1.0 {
                    1.0
                } else {
                    0.0
                }
            };
            return Ok(p * slope(b0 / s) + (1.0 - p) * slope(b1 / s));
        }
        self.mixture_prime(CURVE_EPS, weighted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(r: f64) -> DistributionSpec {
        DistributionSpec::exponential(r).unwrap()
    }

    #[test]
    fn identity_when_cal_equals_test() {
        let th = TheoryFunctions::new(&ScenarioSpec::prediction(exp(1.0), exp(1.0))).unwrap();
        assert!((th.g(0.37) - 0.37).abs() < 1e-15);
        assert_eq!(th.g_prime(0.37), 1.0);
        assert_eq!(th.rho_w(), 1.0);
        assert!((th.iw(0.4) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn exponential_shift_examples() {
        let s = ScenarioSpec::prediction(exp(1.0), exp(3.0));
        let th = TheoryFunctions::new(&s).unwrap();
        assert!((th.g(0.5) - 0.125).abs() < 1e-15);
        let th = TheoryFunctions::new(&s.with_weight(WeightSpec::exp_tilt(2.0).unwrap())).unwrap();
        assert!(th.is_closed_form());
        assert!((th.gw(0.3) - 0.3).abs() < 1e-15);
        assert!((th.rho_w() - 3.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((th.iw(0.3) - 0.3f64.powf(5.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let s = ScenarioSpec::novelty(exp(1.0), exp(2.0), exp(3.0), 0.6)
            .with_weight(WeightSpec::exp_tilt(1.5).unwrap());
        let a = TheoryFunctions::new(&s).unwrap();
        let b = TheoryFunctions::quadrature(&s).unwrap();
        assert!(a.is_closed_form() && !b.is_closed_form());
        assert!((a.rho_w() - b.rho_w()).abs() < 1e-10);
        for k in 1..100 {
            let t = k as f64 / 100.0;
            let pairs = [
                (a.gw(t), b.gw(t)),
                (a.gw_prime(t), b.gw_prime(t)),
                (a.iw(t), b.iw(t)),
                (a.g0w(t).unwrap(), b.g0w(t).unwrap()),
                (a.g(t), b.g(t)),
                (a.g_prime(t), b.g_prime(t)),
                (a.fw_cal(t * 3.0), b.fw_cal(t * 3.0)),
                (a.vw_cal(t * 3.0), b.vw_cal(t * 3.0)),
            ];
            for (i, (x, y)) in pairs.iter().enumerate() {
                assert!(
                    (x - y).abs() < 1e-9 * (1.0 + x.abs()),
                    "curve {i} at t={t}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn table_weight_uses_finite_differences() {
        // a table equal to 1 everywhere reproduces the unweighted curves
        let w = WeightSpec::table(vec![0.5, 1.0], vec![1.0, 1.0, 1.0]).unwrap();
        let s = ScenarioSpec::prediction(exp(1.0), exp(2.0)).with_weight(w);
        let th = TheoryFunctions::new(&s).unwrap();
        for &t in &[0.1, 0.3, 0.7] {
            assert!((th.gw(t) - t * t).abs() < 1e-10);
            assert!((th.gw_prime(t) - 2.0 * t).abs() < 1e-6);
        }
    }

    #[test]
    fn slope_at_zero() {
        let s = ScenarioSpec::novelty(exp(1.0), exp(1.0), exp(0.5), 0.8);
        let th = TheoryFunctions::new(&s).unwrap();
        assert_eq!(th.mixture_slope_at_zero(false).unwrap(), f64::INFINITY);
        let s = ScenarioSpec::novelty(exp(1.0), exp(1.0), exp(3.0), 0.8);
        let th = TheoryFunctions::new(&s).unwrap();
        assert!((th.mixture_slope_at_zero(false).unwrap() - 0.8).abs() < 1e-15);
    }
}
