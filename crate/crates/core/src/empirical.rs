//! Right-continuous step functions on [0, 1]: empirical c.d.f.s of p-values
//! (the FCP process), the reference stair `I_n`, exact sup-distances, and the
//! Benjamini-Hochberg procedure with FDP/TDP accounting.

use crate::error::{check_probability_open, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    jumps: Vec<f64>,
    values: Vec<f64>,
    value_before_first: f64,
    #[serde(default)]
    degenerate: bool,
}

impl StepFunction {
    /// `values[j]` holds on `[jumps[j], jumps[j+1])`; jumps must be strictly
    /// increasing and finite.
    pub fn new(jumps: Vec<f64>, values: Vec<f64>, value_before_first: f64) -> Result<Self> {
        if jumps.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} jumps but {} values",
                jumps.len(),
                values.len()
            )));
        }
        if jumps.iter().any(|t| !t.is_finite()) || jumps.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain(
                "jumps must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self {
            jumps,
            values,
            value_before_first,
            degenerate: false,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            jumps: Vec::new(),
            values: Vec::new(),
            value_before_first: value,
            degenerate: false,
        }
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_before_first(&self) -> f64 {
        self.value_before_first
    }

    /// Set for the e.c.d.f. of an empty sample, which is identically zero.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Level of the last jump `<= t`.
    pub fn eval(&self, t: f64) -> f64 {
        let j = self.jumps.partition_point(|&s| s <= t);
        if j == 0 {
            self.value_before_first
        } else {
            self.values[j - 1]
        }
    }

    /// Left limit `lim_{s -> t-} f(s)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let j = self.jumps.partition_point(|&s| s < t);
        if j == 0 {
            self.value_before_first
        } else {
            self.values[j - 1]
        }
    }
}

/// Empirical c.d.f. of values in [0, 1]; duplicates are merged into a single
/// jump carrying their accumulated mass.
pub fn ecdf(values: &[f64]) -> Result<StepFunction> {
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain("e.c.d.f. input must lie in [0, 1]".into()));
    }
    if values.is_empty() {
        let mut f = StepFunction::constant(0.0);
        f.degenerate = true;
        return Ok(f);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let mut jumps = Vec::new();
    let mut levels = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        if i + 1 < m && sorted[i + 1] == v {
            continue;
        }
        jumps.push(v);
        levels.push((i + 1) as f64 / m as f64);
    }
    Ok(StepFunction {
        jumps,
        values: levels,
        value_before_first: 0.0,
        degenerate: false,
    })
}

/// The stair `I_n(a) = floor((n+1) a) / (n+1)` on [0, 1], with jumps at
/// `k / (n+1)`.
pub fn reference_in(n: usize) -> StepFunction {
    let d = (n + 1) as f64;
    let jumps: Vec<f64> = (1..=n + 1).map(|k| k as f64 / d).collect();
    StepFunction {
        values: jumps.clone(),
        jumps,
        value_before_first: 0.0,
        degenerate: false,
    }
}

/// `sup_{t in [0,1]} |f(t) - g(t)|`, exact.
///
/// Both functions are constant between consecutive points of the union of
/// their jumps, so the supremum is a maximum over those points (and the
/// endpoints), taking right values and left limits.
pub fn sup_deviation(f: &StepFunction, g: &StepFunction) -> f64 {
    let mut best = (f.eval(0.0) - g.eval(0.0))
        .abs()
        .max((f.eval(1.0) - g.eval(1.0)).abs());
    best = best.max((f.left_limit(1.0) - g.left_limit(1.0)).abs());
    for &t in f.jumps.iter().chain(g.jumps.iter()) {
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        best = best.max((f.eval(t) - g.eval(t)).abs());
        if t > 0.0 {
            best = best.max((f.left_limit(t) - g.left_limit(t)).abs());
        }
    }
    best
}

/// Result of the BH step-up procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhOutcome {
    /// Rejected indices, increasing.
    pub rejected: Vec<usize>,
    /// Largest rejected p-value, or 0 when nothing is rejected.
    pub threshold: f64,
    pub k_hat: usize,
}

/// `sup{t in [0,1] : F(t) >= t / alpha}` for a step function `F`.
pub fn bh_threshold_functional(f: &StepFunction, alpha: f64) -> f64 {
    // on each piece [left, right) F is constant, and the admissible t are
    // those with t <= alpha * F
    let mut pieces = Vec::with_capacity(f.jumps.len() + 1);
    let mut left = 0.0;
    let mut level = f.eval(0.0);
    for (j, &t) in f.jumps.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        if t > 1.0 {
            break;
        }
        pieces.push((left, t, level));
        left = t;
        level = f.values[j];
    }
    pieces.push((left, f64::INFINITY, level));
    let mut sup: f64 = 0.0;
    for (lo, hi, v) in pieces {
        let cap = alpha * v;
        if cap >= lo {
            sup = sup.max(cap.min(hi).min(1.0));
        }
    }
    sup
}

/// Benjamini-Hochberg at level `alpha`.
///
/// `k_hat = max{k : p_(k) <= alpha k / m}` and every p-value at or below
/// `alpha k_hat / m` is rejected. The rejection set is also obtained by
/// thresholding at the functional of the p-value e.c.d.f.; the two are
/// checked to coincide.
pub fn bh_reject(pvalues: &[f64], alpha: f64) -> Result<BhOutcome> {
    check_probability_open("alpha", alpha)?;
    let m = pvalues.len();
    if m == 0 {
        return Ok(BhOutcome {
            rejected: Vec::new(),
            threshold: 0.0,
            k_hat: 0,
        });
    }
    let f = ecdf(pvalues)?;
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cutoff = |k: usize| alpha * (k as f64 / m as f64);
    let k_hat = (1..=m)
        .rev()
        .find(|&k| sorted[k - 1] <= cutoff(k))
        .unwrap_or(0);
    let step_up_cut = cutoff(k_hat);
    let rejected: Vec<usize> = (0..m).filter(|&i| pvalues[i] <= step_up_cut).collect();

    let t_func = bh_threshold_functional(&f, alpha);
    let via_functional = (0..m).filter(|&i| pvalues[i] <= t_func).count();
    assert_eq!(
        rejected.len(),
        via_functional,
        "step-up and threshold-functional rejection sets differ"
    );
    debug_assert_eq!(rejected.len(), k_hat);

    let threshold = if k_hat == 0 { 0.0 } else { sorted[k_hat - 1] };
    Ok(BhOutcome {
        rejected,
        threshold,
        k_hat,
    })
}

/// P-values with their null/alternative labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPValues {
    pub values: Vec<f64>,
    pub is_null: Vec<bool>,
}

impl LabeledPValues {
    pub fn new(values: Vec<f64>, is_null: Vec<bool>) -> Result<Self> {
        if values.len() != is_null.len() {
            return Err(Error::Domain(format!(
                "{} p-values but {} labels",
                values.len(),
                is_null.len()
            )));
        }
        Ok(Self { values, is_null })
    }

    pub fn m0(&self) -> usize {
        self.is_null.iter().filter(|&&b| b).count()
    }

    pub fn pi0(&self) -> f64 {
        if self.is_null.is_empty() {
            0.0
        } else {
            self.m0() as f64 / self.is_null.len() as f64
        }
    }
}

/// `(|R ∩ H0| / (|R| ∨ 1), |R ∩ H1| / (|H1| ∨ 1))`.
pub fn fdp_tdp(outcome: &BhOutcome, labels: &LabeledPValues) -> Result<(f64, f64)> {
    let m = labels.is_null.len();
    if let Some(&i) = outcome.rejected.iter().find(|&&i| i >= m) {
        return Err(Error::Domain(format!(
            "rejected index {i} out of range for {m} labels"
        )));
    }
    let false_rej = outcome
        .rejected
        .iter()
        .filter(|&&i| labels.is_null[i])
        .count();
    let true_rej = outcome.rejected.len() - false_rej;
    let m1 = m - labels.m0();
    let fdp = false_rej as f64 / outcome.rejected.len().max(1) as f64;
    let tdp = true_rej as f64 / m1.max(1) as f64;
    Ok((fdp, tdp))
}
