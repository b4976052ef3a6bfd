//! Conformal p-values, weighted conformal p-values and prediction thresholds.
//!
//! All p-values are computed from one sort of the calibration scores: the
//! count `#{S_k >= t}` is a binary search and weighted tail masses come from a
//! suffix sum over the sorted weights. Prediction thresholds are read off the
//! same tail sums, so the p-value/prediction-set duality holds exactly in
//! floating point and not only in exact arithmetic.

use crate::distributions::{DistributionSpec, WeightKind, WeightSpec};
use crate::error::{check_probability_open, Error, Result};
use serde::{Deserialize, Serialize};

/// A vector of p-values together with the calibration size that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueVector {
    pub values: Vec<f64>,
    pub n: usize,
}

impl PValueVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sorted calibration scores with (optionally) their weights, ready to score
/// many test points.
#[derive(Debug, Clone)]
pub struct Calibration {
    sorted: Vec<f64>,
    // suffix[j] = sum of weights of sorted[j..]; empty when unweighted
    suffix: Vec<f64>,
    w_inf: f64,
    weighted: bool,
}

impl Calibration {
    /// Plain (unweighted) calibration.
    pub fn new(cal: &[f64]) -> Result<Self> {
        let sorted = sorted_scores(cal)?;
        Ok(Self {
            sorted,
            suffix: Vec::new(),
            w_inf: 1.0,
            weighted: false,
        })
    }

    /// Weighted calibration. A constant weight equal to its own `w(+inf)`
    /// is handled by the unweighted formula, which it equals exactly.
    pub fn weighted(cal: &[f64], w: &WeightSpec) -> Result<Self> {
        if w.is_uniform() {
            return Self::new(cal);
        }
        let sorted = sorted_scores(cal)?;
        let mut suffix = vec![0.0; sorted.len() + 1];
        for j in (0..sorted.len()).rev() {
            let wj = w.eval(sorted[j])?;
            if !(wj.is_finite() && wj >= 0.0) {
                return Err(Error::Domain(format!(
                    "weight at calibration score {} is {wj}",
                    sorted[j]
                )));
            }
            suffix[j] = suffix[j + 1] + wj;
        }
        let w_inf = w.w_inf();
        let total = w_inf + suffix[0];
        if !(total > 0.0) {
            return Err(Error::DegenerateWeights { total });
        }
        Ok(Self {
            sorted,
            suffix,
            w_inf,
            weighted: true,
        })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_scores(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{S_k < t}`, rejecting exact ties.
    fn rank(&self, t: f64) -> Result<usize> {
        if t.is_nan() {
            return Err(Error::Domain("test score is NaN".into()));
        }
        let j = self.sorted.partition_point(|&s| s < t);
        if j < self.sorted.len() && self.sorted[j] == t {
            return Err(Error::Tie { score: t });
        }
        Ok(j)
    }

    // p-value of a point whose score exceeds exactly `j` calibration scores
    fn tail_pvalue(&self, j: usize) -> f64 {
        let n = self.sorted.len();
        if self.weighted {
            (self.w_inf + self.suffix[j]) / (self.w_inf + self.suffix[0])
        } else {
            (1 + n - j) as f64 / (n + 1) as f64
        }
    }

    pub fn pvalue(&self, t: f64) -> Result<f64> {
        Ok(self.tail_pvalue(self.rank(t)?))
    }

    pub fn pvalues(&self, test: &[f64]) -> Result<PValueVector> {
        let values = test
            .iter()
            .map(|&t| self.pvalue(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(PValueVector {
            values,
            n: self.n(),
        })
    }

    /// The score `q` with `p(t) <= alpha  <=>  t > q` for every non-tied `t`;
    /// `+inf` when no score can reach level `alpha`.
    pub fn threshold(&self, alpha: f64) -> Result<f64> {
        check_probability_open("alpha", alpha)?;
        let n = self.sorted.len();
        // tail_pvalue is nonincreasing in j; find the first j with p <= alpha
        let j_star = partition_point_range(0, n + 1, |j| self.tail_pvalue(j) > alpha);
        if j_star > n {
            Ok(f64::INFINITY)
        } else if j_star == 0 {
            Ok(f64::NEG_INFINITY)
        } else {
            Ok(self.sorted[j_star - 1])
        }
    }
}

// first index in lo..hi where pred is false (pred monotone true-then-false)
fn partition_point_range(mut lo: usize, mut hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn sorted_scores(cal: &[f64]) -> Result<Vec<f64>> {
    if cal.iter().any(|s| s.is_nan()) {
        return Err(Error::Domain("calibration scores contain NaN".into()));
    }
    let mut sorted = cal.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(sorted)
}

/// `p_i = (1 + #{k : S_k >= T_i}) / (n + 1)`.
pub fn conformal_pvalues(cal: &[f64], test: &[f64]) -> Result<PValueVector> {
    Calibration::new(cal)?.pvalues(test)
}

/// `p_i = (w(+inf) + sum_k w(S_k) 1{S_k >= T_i}) / (w(+inf) + sum_k w(S_k))`.
pub fn weighted_conformal_pvalues(
    cal: &[f64],
    test: &[f64],
    w: &WeightSpec,
) -> Result<PValueVector> {
    Calibration::weighted(cal, w)?.pvalues(test)
}

/// `inf{x : mu([-inf, x]) >= level}` for the discrete measure putting mass
/// `masses[i]` on `points[i]` (points may be `+inf`).
pub fn weighted_quantile(points: &[f64], masses: &[f64], level: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Domain(
            "weighted quantile of an empty measure".into(),
        ));
    }
    if points.len() != masses.len() {
        return Err(Error::Domain(format!(
            "{} points but {} masses",
            points.len(),
            masses.len()
        )));
    }
    check_probability_open("level", level)?;
    if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) || points.iter().any(|p| p.is_nan()) {
        return Err(Error::Domain(
            "masses must be finite and nonnegative, points not NaN".into(),
        ));
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("masses sum to {total}, expected 1")));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
    let mut cum = 0.0;
    for &i in &order {
        cum += masses[i];
        if cum >= level {
            return Ok(points[i]);
        }
    }
    // rounding left the total just under `level`
    Ok(points[*order.last().expect("nonempty")])
}

/// Upper end of the level-`1 - alpha` (weighted) split-conformal prediction
/// set: a candidate with score `t` is excluded exactly when `t` exceeds it.
pub fn prediction_threshold(cal: &[f64], alpha: f64, w: &WeightSpec) -> Result<f64> {
    Calibration::weighted(cal, w)?.threshold(alpha)
}

/// Probability-integral transform of a scored problem.
///
/// Scores are mapped through `F_cal` and the weight becomes
/// `u -> w(F_cal^{-1}(u))`, keeping `w(+inf)`. Ranks and weights at the
/// calibration points are preserved, so (weighted) p-values are unchanged.
/// Uniform01 calibration returns the inputs unchanged.
pub fn standardize(
    cal: &[f64],
    test: &[f64],
    w: &WeightSpec,
    cal_spec: &DistributionSpec,
) -> Result<(Vec<f64>, Vec<f64>, WeightSpec)> {
    cal_spec.validate()?;
    if *cal_spec == DistributionSpec::Uniform01 {
        return Ok((cal.to_vec(), test.to_vec(), w.clone()));
    }
    let map = |xs: &[f64]| xs.iter().map(|&x| cal_spec.cdf(x)).collect::<Vec<_>>();
    let weight = match w.kind() {
        WeightKind::Constant { .. } => w.clone(),
        _ => WeightSpec::with_w_inf(
            WeightKind::Standardized {
                base: Box::new(w.clone()),
                cal: *cal_spec,
            },
            w.w_inf(),
        )?,
    };
    Ok((map(cal), map(test), weight))
}
