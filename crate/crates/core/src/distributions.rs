//! Analytic score distributions and weight functions.
//!
//! [`DistributionSpec`] plays the role of the calibration law, the test law
//! and the null law of a scenario. Every variant is continuous and increasing
//! on its support, so the quantile is a true inverse there and sampling is done
//! by inverse transform from a [`SeededRng`].
//!
//! [`WeightSpec`] is a nonnegative weight function together with its value at
//! `+inf`, the mass given to the point at infinity in weighted conformal
//! p-values.

use crate::error::{Error, Result};
use crate::numerics::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
pub use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};

/// Tolerance used for analytic identities in tests and assertions.
pub const ANALYTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform01,
    Exponential { rate: f64 },
    Normal { mean: f64, sd: f64 },
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        let d = DistributionSpec::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        let d = DistributionSpec::Normal { mean, sd };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Uniform01 => Ok(()),
            DistributionSpec::Exponential { rate } => {
                if rate.is_finite() && rate > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Configuration(format!(
                        "exponential rate must be positive and finite, got {rate}"
                    )))
                }
            }
            DistributionSpec::Normal { mean, sd } => {
                if mean.is_finite() && sd.is_finite() && sd > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Configuration(format!(
                        "normal needs finite mean and positive sd, got mean={mean}, sd={sd}"
                    )))
                }
            }
        }
    }

    /// Closed support `(lower, upper)`; infinite ends are `±inf`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DistributionSpec::Uniform01 => (0.0, 1.0),
            DistributionSpec::Exponential { .. } => (0.0, f64::INFINITY),
            DistributionSpec::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform01 => x.clamp(0.0, 1.0),
            DistributionSpec::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            DistributionSpec::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
        }
    }

    /// Survival function `1 - cdf(x)`, computed without cancellation in the
    /// upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform01 => 1.0 - x.clamp(0.0, 1.0),
            DistributionSpec::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            DistributionSpec::Normal { mean, sd } => std_normal_sf((x - mean) / sd),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform01 => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionSpec::Exponential { rate } => {
                if x >= 0.0 && x.is_finite() {
                    rate * (-rate * x).exp()
                } else {
                    0.0
                }
            }
            DistributionSpec::Normal { mean, sd } => std_normal_pdf((x - mean) / sd) / sd,
        }
    }

    /// Generalised inverse `inf{x : F(x) >= u}` for `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!(
                "quantile level {u} must lie in (0, 1)"
            )));
        }
        Ok(self.quantile_unchecked(u))
    }

    /// Quantile extended to the closed interval: `u <= 0` gives the lower end
    /// of the support and `u >= 1` the upper end.
    pub fn quantile_unchecked(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        match *self {
            DistributionSpec::Uniform01 => u,
            DistributionSpec::Exponential { rate } => -(-u).ln_1p() / rate,
            DistributionSpec::Normal { mean, sd } => mean + sd * std_normal_quantile(u),
        }
    }

    /// Inverse survival function: the `x` with `sf(x) = v`, accurate for small
    /// `v`. `v <= 0` gives the upper end of the support, `v >= 1` the lower.
    pub fn isf(&self, v: f64) -> f64 {
        let (lo, hi) = self.support();
        if v <= 0.0 {
            return hi;
        }
        if v >= 1.0 {
            return lo;
        }
        match *self {
            DistributionSpec::Uniform01 => 1.0 - v,
            DistributionSpec::Exponential { rate } => -v.ln() / rate,
            DistributionSpec::Normal { mean, sd } => mean - sd * std_normal_quantile(v),
        }
    }

    /// `count` draws by inverse transform.
    pub fn sample(&self, rng: &mut SeededRng, count: usize) -> Vec<f64> {
        (0..count)
            .map(|_| self.quantile_unchecked(rng.open01()))
            .collect()
    }

    /// Whether `other` is absolutely continuous with respect to `self`
    /// (support inclusion, which is the criterion for these families).
    pub fn dominates(&self, other: &DistributionSpec) -> bool {
        let (a, b) = self.support();
        let (c, d) = other.support();
        a <= c && d <= b
    }
}

/// Shape of a weight function on the real line.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `w(x) = c`.
    Constant { c: f64 },
    /// `w(x) = exp(-lambda * max(x, 0))`.
    ExpTilt { lambda: f64 },
    /// Right-continuous step function: `values[0]` on `(-inf, breakpoints[0])`,
    /// `values[j]` on `[breakpoints[j-1], breakpoints[j])`, and the last value
    /// from the last breakpoint on. `values.len() == breakpoints.len() + 1`.
    Table {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Density ratio `pdf_target / pdf_cal`.
    OracleRatio {
        cal: DistributionSpec,
        target: DistributionSpec,
    },
    /// `u -> base(cal.quantile(u))` on (0, 1): a weight carried over to
    /// standardised (probability-integral-transformed) scores.
    Standardized {
        base: Box<WeightSpec>,
        cal: DistributionSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightRepr", into = "WeightRepr")]
pub struct WeightSpec {
    kind: WeightKind,
    w_inf: f64,
}

impl WeightSpec {
    /// Builds a weight with the default `w(+inf)`: the supremum of `w` over its
    /// natural domain (the real line, or the calibration support for oracle
    /// ratios). Fails when that supremum is infinite.
    pub fn new(kind: WeightKind) -> Result<Self> {
        validate_kind(&kind)?;
        let w_inf = default_w_inf(&kind)?;
        Ok(Self { kind, w_inf })
    }

    pub fn with_w_inf(kind: WeightKind, w_inf: f64) -> Result<Self> {
        validate_kind(&kind)?;
        if !(w_inf.is_finite() && w_inf >= 0.0) {
            return Err(Error::Configuration(format!(
                "w_inf must be finite and nonnegative, got {w_inf}"
            )));
        }
        Ok(Self { kind, w_inf })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(WeightKind::Constant { c })
    }

    pub fn exp_tilt(lambda: f64) -> Result<Self> {
        Self::new(WeightKind::ExpTilt { lambda })
    }

    pub fn table(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(WeightKind::Table {
            breakpoints,
            values,
        })
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn w_inf(&self) -> f64 {
        self.w_inf
    }

    /// Multiplies both `w` and `w(+inf)` by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Domain(format!(
                "scale factor {factor} must be positive"
            )));
        }
        let kind = match &self.kind {
            WeightKind::Constant { c } => WeightKind::Constant { c: c * factor },
            WeightKind::Table {
                breakpoints,
                values,
            } => WeightKind::Table {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
            _ => {
                return Err(Error::Configuration(
                    "only constant and table weights can be rescaled".into(),
                ))
            }
        };
        Ok(Self {
            kind,
            w_inf: self.w_inf * factor,
        })
    }

    /// True for a constant weight whose value at `+inf` equals the constant,
    /// the case where weighted p-values coincide with plain ones.
    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, WeightKind::Constant { c } if c == self.w_inf && c > 0.0)
    }

    /// Whether the weight may jump (so derivatives of induced curves must be
    /// taken numerically).
    pub fn is_piecewise_constant(&self) -> bool {
        match &self.kind {
            WeightKind::Table { .. } => true,
            WeightKind::Standardized { base, .. } => base.is_piecewise_constant(),
            _ => false,
        }
    }

    /// `w(x)`; returns `w(+inf)` for `x = +inf`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x == f64::INFINITY {
            return Ok(self.w_inf);
        }
        if x.is_nan() {
            return Err(Error::Domain("weight evaluated at NaN".into()));
        }
        match &self.kind {
            WeightKind::Constant { c } => Ok(*c),
            WeightKind::ExpTilt { lambda } => Ok((-lambda * x.max(0.0)).exp()),
            WeightKind::Table {
                breakpoints,
                values,
            } => {
                let j = breakpoints.partition_point(|&b| b <= x);
                Ok(values[j])
            }
            WeightKind::OracleRatio { cal, target } => {
                let pc = cal.pdf(x);
                let pt = target.pdf(x);
                if pc > 0.0 {
                    Ok(pt / pc)
                } else if pt > 0.0 {
                    Err(Error::Domain(format!(
                        "oracle ratio undefined at x = {x}: target has density where calibration has none"
                    )))
                } else {
                    Ok(0.0)
                }
            }
            WeightKind::Standardized { base, cal } => base.eval(cal.quantile_unchecked(x)),
        }
    }

    /// Supremum of `w` over the support of `cal`; `None` when unbounded.
    pub fn sup_over(&self, cal: &DistributionSpec) -> Option<f64> {
        let (a, b) = cal.support();
        sup_on_interval(&self.kind, a, b)
    }
}

fn validate_kind(kind: &WeightKind) -> Result<()> {
    let bad = |msg: String| Err(Error::Configuration(msg));
    match kind {
        WeightKind::Constant { c } => {
            if !(c.is_finite() && *c >= 0.0) {
                return bad(format!(
                    "constant weight must be finite and nonnegative, got {c}"
                ));
            }
        }
        WeightKind::ExpTilt { lambda } => {
            if !lambda.is_finite() {
                return bad(format!("exp_tilt lambda must be finite, got {lambda}"));
            }
        }
        WeightKind::Table {
            breakpoints,
            values,
        } => {
            if values.len() != breakpoints.len() + 1 {
                return bad(format!(
                    "table weight needs breakpoints.len() + 1 values, got {} breakpoints and {} values",
                    breakpoints.len(),
                    values.len()
                ));
            }
            if breakpoints.windows(2).any(|w| !(w[0] < w[1]))
                || breakpoints.iter().any(|b| !b.is_finite())
            {
                return bad("table breakpoints must be finite and strictly increasing".into());
            }
            if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return bad("table values must be finite and nonnegative".into());
            }
        }
        WeightKind::OracleRatio { cal, target } => {
            cal.validate()?;
            target.validate()?;
            if !cal.dominates(target) {
                return bad(format!(
                    "target {target:?} is not absolutely continuous with respect to calibration {cal:?}"
                ));
            }
        }
        WeightKind::Standardized { cal, .. } => cal.validate()?,
    }
    Ok(())
}

fn default_w_inf(kind: &WeightKind) -> Result<f64> {
    let sup = match kind {
        WeightKind::OracleRatio { cal, .. } => {
            sup_on_interval(kind, cal.support().0, cal.support().1)
        }
        WeightKind::Standardized { base, .. } => Some(base.w_inf),
        _ => sup_on_interval(kind, f64::NEG_INFINITY, f64::INFINITY),
    };
    sup.ok_or_else(|| {
        Error::Configuration(format!(
            "weight {kind:?} is unbounded; supply w_inf explicitly or use a bounded weight"
        ))
    })
}

fn sup_on_interval(kind: &WeightKind, a: f64, b: f64) -> Option<f64> {
    match kind {
        WeightKind::Constant { c } => Some(*c),
        WeightKind::ExpTilt { lambda } => {
            // w is nonincreasing in max(x, 0) for lambda >= 0
            if *lambda >= 0.0 {
                Some((-lambda * a.max(0.0)).exp())
            } else if b.is_finite() {
                Some((-lambda * b.max(0.0)).exp())
            } else {
                None
            }
        }
        WeightKind::Table {
            breakpoints,
            values,
        } => {
            let mut sup = f64::NEG_INFINITY;
            for (j, v) in values.iter().enumerate() {
                let lo = if j == 0 {
                    f64::NEG_INFINITY
                } else {
                    breakpoints[j - 1]
                };
                let hi = if j == breakpoints.len() {
                    f64::INFINITY
                } else {
                    breakpoints[j]
                };
                if lo < b && hi > a {
                    sup = sup.max(*v);
                }
            }
            if sup.is_finite() {
                Some(sup)
            } else {
                Some(0.0)
            }
        }
        WeightKind::OracleRatio { cal, target } => oracle_ratio_sup(cal, target, a, b),
        WeightKind::Standardized { base, cal } => {
            // u in (a, b) ∩ (0, 1) maps to the corresponding quantile range
            let lo = cal.quantile_unchecked(a.max(0.0));
            let hi = cal.quantile_unchecked(b.min(1.0));
            sup_on_interval(&base.kind, lo, hi)
        }
    }
}

/// Supremum of `pdf_target / pdf_cal` over `(a, b)`, for the supported pairs.
fn oracle_ratio_sup(
    cal: &DistributionSpec,
    target: &DistributionSpec,
    a: f64,
    b: f64,
) -> Option<f64> {
    use DistributionSpec::*;
    if cal == target {
        return Some(1.0);
    }
    match (*cal, *target) {
        (Exponential { rate: rc }, Exponential { rate: rt }) => {
            // (rt/rc) exp(-(rt - rc) x) on x >= 0
            if rt >= rc {
                Some(rt / rc * (-(rt - rc) * a.max(0.0)).exp())
            } else if b.is_finite() {
                Some(rt / rc * (-(rt - rc) * b).exp())
            } else {
                None
            }
        }
        (Exponential { rate }, Uniform01) => {
            // exp(rate x) / rate on [0, 1]
            let top = b.min(1.0);
            Some((rate * top).exp() / rate)
        }
        (Normal { .. }, Uniform01) => {
            let p = cal.pdf(0.0).min(cal.pdf(1.0));
            Some(1.0 / p)
        }
        (Normal { mean: mc, sd: sc }, Normal { mean: mt, sd: st }) => {
            if st < sc {
                // concave quadratic log-ratio, maximised at x*
                let pc = 1.0 / (sc * sc);
                let pt = 1.0 / (st * st);
                let x = ((mt * pt - mc * pc) / (pt - pc)).clamp(a, b);
                Some(target.pdf(x) / cal.pdf(x))
            } else {
                None
            }
        }
        (Normal { .. }, Exponential { .. }) => None,
        _ => None,
    }
}

/// The oracle weight `dP_target / dP_cal`.
///
/// Identical laws give the constant weight 1. Pairs without absolute
/// continuity, or whose density ratio is unbounded on the calibration
/// support, are rejected.
pub fn oracle_weight(cal: &DistributionSpec, target: &DistributionSpec) -> Result<WeightSpec> {
    cal.validate()?;
    target.validate()?;
    if cal == target {
        return WeightSpec::constant(1.0);
    }
    if !cal.dominates(target) {
        return Err(Error::Configuration(format!(
            "target {target:?} is not absolutely continuous with respect to calibration {cal:?}"
        )));
    }
    let (a, b) = cal.support();
    match oracle_ratio_sup(cal, target, a, b) {
        Some(sup) => WeightSpec::with_w_inf(
            WeightKind::OracleRatio {
                cal: *cal,
                target: *target,
            },
            sup,
        ),
        None => Err(Error::Configuration(format!(
            "oracle ratio between {cal:?} and {target:?} is unbounded on the calibration support"
        ))),
    }
}

// --- JSON representation -------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum WeightRepr {
    Constant {
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_inf: Option<f64>,
    },
    ExpTilt {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_inf: Option<f64>,
    },
    Table {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_inf: Option<f64>,
    },
    OracleRatio {
        cal: DistributionSpec,
        target: DistributionSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_inf: Option<f64>,
    },
    Standardized {
        base: Box<WeightSpec>,
        cal: DistributionSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_inf: Option<f64>,
    },
}

impl TryFrom<WeightRepr> for WeightSpec {
    type Error = Error;

    fn try_from(r: WeightRepr) -> Result<Self> {
        let (kind, w_inf) = match r {
            WeightRepr::Constant { c, w_inf } => (WeightKind::Constant { c }, w_inf),
            WeightRepr::ExpTilt { lambda, w_inf } => (WeightKind::ExpTilt { lambda }, w_inf),
            WeightRepr::Table {
                breakpoints,
                values,
                w_inf,
            } => (
                WeightKind::Table {
                    breakpoints,
                    values,
                },
                w_inf,
            ),
            WeightRepr::OracleRatio { cal, target, w_inf } => {
                (WeightKind::OracleRatio { cal, target }, w_inf)
            }
            WeightRepr::Standardized { base, cal, w_inf } => {
                (WeightKind::Standardized { base, cal }, w_inf)
            }
        };
        match w_inf {
            Some(v) => WeightSpec::with_w_inf(kind, v),
            None => WeightSpec::new(kind),
        }
    }
}

impl From<WeightSpec> for WeightRepr {
    fn from(w: WeightSpec) -> Self {
        let w_inf = Some(w.w_inf);
        match w.kind {
            WeightKind::Constant { c } => WeightRepr::Constant { c, w_inf },
            WeightKind::ExpTilt { lambda } => WeightRepr::ExpTilt { lambda, w_inf },
            WeightKind::Table {
                breakpoints,
                values,
            } => WeightRepr::Table {
                breakpoints,
                values,
                w_inf,
            },
            WeightKind::OracleRatio { cal, target } => {
                WeightRepr::OracleRatio { cal, target, w_inf }
            }
            WeightKind::Standardized { base, cal } => WeightRepr::Standardized { base, cal, w_inf },
        }
    }
}

impl std::fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            WeightKind::Constant { c } => write!(f, "constant({c})"),
            WeightKind::ExpTilt { lambda } => write!(f, "exp_tilt({lambda})"),
            WeightKind::Table { values, .. } => write!(f, "table({} pieces)", values.len()),
            WeightKind::OracleRatio { cal, target } => write!(f, "oracle({target:?}/{cal:?})"),
            WeightKind::Standardized { base, .. } => write!(f, "standardized({base})"),
        }?;
        write!(f, ", w_inf={}", self.w_inf)
    }
}
