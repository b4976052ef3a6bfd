//! Tables behind the two reference figures: the (1 - delta)-quantile of the
//! sup statistic against its asymptotic and DKW counterparts, and weighted
//! FCP under a fixed exponential shift as the weight moves off the oracle.

use super::{empirical_quantile, run_fcp_experiment, ExperimentConfig, Mode};
use crate::conformal::Calibration;
use crate::distributions::{DistributionSpec, WeightKind, WeightSpec};
use crate::empirical::ecdf;
use crate::error::{check_probability_open, Error, Result};
use crate::limit_sampler::bootstrap_quantile_se;
use crate::limits::{
    fcp_pointwise_ci, fcp_uniform_band, AsymptoticRegime, ScenarioSpec, TheoryFunctions,
};
use crate::rng::SeededRng;
use crate::SCHEMA_VERSION;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default miscoverage level of the shift table.
pub const FIG2_ALPHA: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub n: usize,
    pub m: usize,
    pub tau: f64,
    pub delta: f64,
    pub mc_quantile: f64,
    pub mc_quantile_se: f64,
    /// Kolmogorov quantile over `sqrt(tau)`.
    pub asymptotic: f64,
    pub dkw: f64,
}

/// One row per `(n, m, delta)`. The sup statistics of a cell are shared by
/// all its deltas.
pub fn reproduce_fig1(
    n_list: &[usize],
    m_list: &[usize],
    deltas: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<Fig1Row>> {
    if deltas.is_empty() {
        return Err(Error::Configuration(
            "at least one delta is required".into(),
        ));
    }
    for &d in deltas {
        check_probability_open("delta", d)?;
    }
    let u = DistributionSpec::Uniform01;
    let mut rows = Vec::new();
    for &n in n_list {
        for &m in m_list {
            let cfg = ExperimentConfig {
                schema_version: SCHEMA_VERSION,
                mode: Mode::FcpSup,
                scenario: ScenarioSpec::prediction(u, u),
                n,
                m,
                alphas: vec![0.5],
                delta: deltas[0],
                reps,
                master_seed: seed,
            };
            let res = run_fcp_experiment(&cfg)?;
            let sups: Vec<f64> = res.records.iter().filter_map(|r| r.sup_stat).collect();
            for &delta in deltas {
                let band = fcp_uniform_band(n, m, delta)?;
                rows.push(Fig1Row {
                    n,
                    m,
                    tau: band.tau,
                    delta,
                    mc_quantile: empirical_quantile(&sups, 1.0 - delta)?,
                    mc_quantile_se: bootstrap_quantile_se(&sups, 1.0 - delta, seed)?,
                    asymptotic: band.asymptotic_halfwidth,
                    dkw: band.dkw_halfwidth,
                });
            }
        }
    }
    Ok(rows)
}

/// Monte Carlo columns of a shift-table row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig2Mc {
    pub reps: usize,
    pub mean: f64,
    pub sd: f64,
    /// Empirical quantiles at `(1 - ci_level) / 2` and `(1 + ci_level) / 2`.
    pub q_lo: f64,
    pub q_hi: f64,
    /// Whether `mean` lies inside `[ci_lo, ci_hi]`.
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    /// Offset of the tilt rate from the oracle value 2.
    pub shift: f64,
    pub alpha: f64,
    /// `G^w(alpha)` from the closed-form path.
    pub mean: f64,
    /// The same from numerical quadrature.
    pub mean_quadrature: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<Fig2Mc>,
}

/// Calibration Exp(1), test Exp(3), weight `w(x) = exp(-(2 + shift) x)` with
/// `w(+inf) = w_inf`. With `mc_reps`, each replication draws one calibration
/// and one test sample and evaluates every shift on them.
#[allow(clippy::too_many_arguments)]
pub fn reproduce_fig2(
    shifts: &[f64],
    alpha: f64,
    ci_level: f64,
    n: usize,
    m: usize,
    mc_reps: Option<usize>,
    seed: u64,
    w_inf: f64,
) -> Result<Vec<Fig2Row>> {
    check_probability_open("alpha", alpha)?;
    check_probability_open("ci_level", ci_level)?;
    let cal = DistributionSpec::exponential(1.0)?;
    let test = DistributionSpec::exponential(3.0)?;
    let regime = AsymptoticRegime::new(n, m)?;
    let weights = shifts
        .iter()
        .map(|&s| WeightSpec::with_w_inf(WeightKind::ExpTilt { lambda: 2.0 + s }, w_inf))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(shifts.len());
    for (&shift, w) in shifts.iter().zip(&weights) {
        let scenario = ScenarioSpec::prediction(cal, test).with_weight(w.clone());
        scenario.validate()?;
        let closed = TheoryFunctions::new(&scenario)?;
        let quad = TheoryFunctions::quadrature(&scenario)?;
        let ci = fcp_pointwise_ci(alpha, ci_level, &regime, &closed)?;
        rows.push(Fig2Row {
            shift,
            alpha,
            mean: ci.mean,
            mean_quadrature: quad.gw(alpha),
            ci_lo: ci.lo,
            ci_hi: ci.hi,
            mc: None,
        });
    }
    let Some(reps) = mc_reps else {
        return Ok(rows);
    };
    if reps == 0 {
        return Err(Error::Configuration("mc_reps must be at least 1".into()));
    }
    // fcp[r][j]: replication r, shift j.
    let fcp = (0..reps as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let c = cal.sample(&mut SeededRng::new(seed, r), n);
            let t = test.sample(&mut SeededRng::new(seed, r + reps as u64), m);
            weights
                .iter()
                .map(|w| Ok(ecdf(&Calibration::weighted(&c, w)?.pvalues(&t)?.values)?.eval(alpha)))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    for (j, row) in rows.iter_mut().enumerate() {
        let xs: Vec<f64> = fcp.iter().map(|v| v[j]).collect();
        let mean = xs.iter().sum::<f64>() / reps as f64;
        let sd = if reps > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
        } else {
            0.0
        };
        row.mc = Some(Fig2Mc {
            reps,
            mean,
            sd,
            q_lo: empirical_quantile(&xs, 0.5 * (1.0 - ci_level))?,
            q_hi: empirical_quantile(&xs, 0.5 * (1.0 + ci_level))?,
            inside: row.ci_lo <= mean && mean <= row.ci_hi,
        });
    }
    Ok(rows)
}
