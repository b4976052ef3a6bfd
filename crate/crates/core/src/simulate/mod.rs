//! Seeded Monte Carlo experiments.
//!
//! Replication `r` draws calibration scores from stream `r` and test scores
//! from stream `r + reps`; in novelty modes the nulls come from stream
//! `r + reps` and the alternatives from `r + 2 reps`. Replications run in
//! parallel and are gathered by index, so results do not depend on the
//! number of worker threads.

mod config;
mod figures;

pub use config::{ExperimentConfig, Mode, DEFAULT_SEED};
pub use figures::{reproduce_fig1, reproduce_fig2, Fig1Row, Fig2Mc, Fig2Row, FIG2_ALPHA};

use crate::conformal::Calibration;
use crate::empirical::{bh_reject, ecdf, fdp_tdp, reference_in, sup_deviation, LabeledPValues};
use crate::error::{Error, Result};
use crate::limit_sampler::bootstrap_quantile_se;
use crate::limits::{
    fcp_pointwise_ci, fcp_uniform_band, fdp_tdp_asymptotics, AsymptoticRegime, BhMoments,
    FcpInterval, MomentMode, ScenarioSpec, TheoryFunctions, UniformBand,
};
use crate::rng::SeededRng;
use crate::SCHEMA_VERSION;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Type-7 (linear interpolation) sample quantile; `p` is clamped to [0, 1].
pub fn empirical_quantile(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("quantile of an empty sample".into()));
    }
    if p.is_nan() || samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("quantile level or sample is NaN".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let h = (xs.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(xs.len() - 1);
    Ok(xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo]))
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Per-replication outputs. Vectors are indexed like `config.alphas`; BH
/// fields are empty in FCP modes and `sup_stat` is `None` in BH modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub rep: usize,
    /// `||FCP - I_n||_inf`.
    pub sup_stat: Option<f64>,
    pub fcp: Vec<f64>,
    pub fdp: Vec<f64>,
    pub tdp: Vec<f64>,
    pub bh_threshold: Vec<f64>,
    pub k_hat: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
    /// Standard error of the mean.
    pub se: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            var,
            se: (var / n).sqrt(),
        }
    }
}

/// Summary of the sup statistic over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupSummary {
    pub mean: f64,
    /// Empirical `(1 - delta)`-quantile of `||FCP - I_n||_inf`.
    pub quantile: f64,
    pub quantile_se: f64,
    /// The same quantile times `sqrt(tau)`.
    pub scaled_quantile: f64,
    /// Share of replications with `||FCP - I_n||_inf` within the asymptotic
    /// band half-width.
    pub band_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub alpha: f64,
    pub fcp: Moments,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fdp: Option<Moments>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tdp: Option<Moments>,
    /// `sqrt(tau)` times the standard deviation of the FDP.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fdp_scaled_sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tdp_scaled_sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bh_threshold_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub reps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup: Option<SupSummary>,
    pub per_alpha: Vec<AlphaSummary>,
}

/// Asymptotic predictions matching an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryOverlay {
    pub regime: AsymptoticRegime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<UniformBand>,
    /// Pointwise FCP intervals at level `1 - delta`, one per alpha.
    pub fcp: Vec<FcpInterval>,
    /// BH limit moments per alpha, or the reason they are unavailable.
    pub bh: Vec<BhOverlay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhOverlay {
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<BhMoments>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub summary: Summary,
    pub theory: TheoryOverlay,
}

/// Runs the experiment described by `cfg` (dispatching on its mode).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    match cfg.mode {
        Mode::FcpSup | Mode::FcpPointwise | Mode::WeightedFcp => run_fcp_experiment(cfg),
        Mode::BhFdp | Mode::WeightedBh => run_bh_experiment(cfg),
    }
}

fn calibration_for(cfg: &ExperimentConfig, cal: &[f64]) -> Result<Calibration> {
    match (cfg.mode.is_weighted(), &cfg.scenario.weight) {
        (true, Some(w)) => Calibration::weighted(cal, w),
        (true, None) => Err(Error::Configuration(format!(
            "mode {:?} needs scenario.weight",
            cfg.mode
        ))),
        (false, _) => Calibration::new(cal),
    }
}

/// Scenario seen by the theory overlay: plain modes ignore the weight.
fn theory_scenario(cfg: &ExperimentConfig) -> ScenarioSpec {
    let mut s = cfg.scenario.clone();
    if !cfg.mode.is_weighted() {
        s.weight = None;
    }
    s
}

/// Prediction-style replications: FCP curve, its sup-distance to `I_n` and
/// `FCP(alpha)` for every configured alpha.
pub fn run_fcp_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.mode.is_bh() {
        return Err(Error::Configuration(format!(
            "mode {:?} is not an FCP mode",
            cfg.mode
        )));
    }
    let reference = reference_in(cfg.n);
    let reps = cfg.reps as u64;
    let records = (0..cfg.reps)
        .into_par_iter()
        .map(|r| -> Result<Record> {
            let cal = cfg
                .scenario
                .cal
                .sample(&mut SeededRng::new(cfg.master_seed, r as u64), cfg.n);
            let test = cfg
                .scenario
                .test
                .sample(&mut SeededRng::new(cfg.master_seed, r as u64 + reps), cfg.m);
            let p = calibration_for(cfg, &cal)?.pvalues(&test)?;
            let f = ecdf(&p.values)?;
            Ok(Record {
                rep: r,
                sup_stat: Some(sup_deviation(&f, &reference)),
                fcp: cfg.alphas.iter().map(|&a| f.eval(a)).collect(),
                fdp: Vec::new(),
                tdp: Vec::new(),
                bh_threshold: Vec::new(),
                k_hat: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(cfg, records)
}

/// Novelty-style replications: BH on the mixed test sample, with FDP and
/// TDP against the known labels.
pub fn run_bh_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    if !cfg.mode.is_bh() {
        return Err(Error::Configuration(format!(
            "mode {:?} is not a BH mode",
            cfg.mode
        )));
    }
    let sc = &cfg.scenario;
    let (null, pi0) = match (sc.null_dist, sc.pi0) {
        (Some(d), Some(p)) => (d, p),
        _ => {
            return Err(Error::Configuration(
                "BH modes need scenario.null_dist and scenario.pi0".into(),
            ))
        }
    };
    let m0 = (pi0 * cfg.m as f64).floor() as usize;
    let m1 = cfg.m - m0;
    let reps = cfg.reps as u64;
    let is_null: Vec<bool> = (0..cfg.m).map(|i| i < m0).collect();
    let records = (0..cfg.reps)
        .into_par_iter()
        .map(|r| -> Result<Record> {
            let r64 = r as u64;
            let cal = sc
                .cal
                .sample(&mut SeededRng::new(cfg.master_seed, r64), cfg.n);
            let mut test = null.sample(&mut SeededRng::new(cfg.master_seed, r64 + reps), m0);
            test.extend(
                sc.test
                    .sample(&mut SeededRng::new(cfg.master_seed, r64 + 2 * reps), m1),
            );
            let p = calibration_for(cfg, &cal)?.pvalues(&test)?;
            let f = ecdf(&p.values)?;
            let labels = LabeledPValues::new(p.values, is_null.clone())?;
            let mut rec = Record {
                rep: r,
                sup_stat: None,
                fcp: cfg.alphas.iter().map(|&a| f.eval(a)).collect(),
                fdp: Vec::with_capacity(cfg.alphas.len()),
                tdp: Vec::with_capacity(cfg.alphas.len()),
                bh_threshold: Vec::with_capacity(cfg.alphas.len()),
                k_hat: Vec::with_capacity(cfg.alphas.len()),
            };
            for &a in &cfg.alphas {
                let out = bh_reject(&labels.values, a)?;
                let (fdp, tdp) = fdp_tdp(&out, &labels)?;
                rec.fdp.push(fdp);
                rec.tdp.push(tdp);
                rec.bh_threshold.push(out.threshold);
                rec.k_hat.push(out.k_hat);
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    finish(cfg, records)
}

fn finish(cfg: &ExperimentConfig, records: Vec<Record>) -> Result<ExperimentResult> {
    let theory = theory_overlay(cfg)?;
    let summary = summarize(cfg, &records, &theory.regime, theory.band.as_ref())?;
    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        records,
        summary,
        theory,
    })
}

/// Recomputes the summary from the records alone.
pub fn summarize(
    cfg: &ExperimentConfig,
    records: &[Record],
    regime: &AsymptoticRegime,
    band: Option<&UniformBand>,
) -> Result<Summary> {
    let root_tau = regime.tau.sqrt();
    let sups: Vec<f64> = records.iter().filter_map(|r| r.sup_stat).collect();
    let sup = if sups.len() == records.len() && !sups.is_empty() {
        let q = empirical_quantile(&sups, 1.0 - cfg.delta)?;
        let covered = match band {
            Some(b) => {
                sups.iter()
                    .filter(|&&s| s <= b.asymptotic_halfwidth)
                    .count() as f64
                    / sups.len() as f64
            }
            None => f64::NAN,
        };
        Some(SupSummary {
            mean: Moments::of(&sups).mean,
            quantile: q,
            quantile_se: bootstrap_quantile_se(&sups, 1.0 - cfg.delta, cfg.master_seed)?,
            scaled_quantile: root_tau * q,
            band_coverage: covered,
        })
    } else {
        None
    };
    let bh = cfg.mode.is_bh();
    let column = |j: usize, pick: fn(&Record) -> &Vec<f64>| -> Vec<f64> {
        records.iter().map(|r| pick(r)[j]).collect()
    };
    let per_alpha = cfg
        .alphas
        .iter()
        .enumerate()
        .map(|(j, &alpha)| {
            let fcp = Moments::of(&column(j, |r| &r.fcp));
            if !bh {
                return AlphaSummary {
                    alpha,
                    fcp,
                    fdp: None,
                    tdp: None,
                    fdp_scaled_sd: None,
                    tdp_scaled_sd: None,
                    bh_threshold_mean: None,
                };
            }
            let fdp = Moments::of(&column(j, |r| &r.fdp));
            let tdp = Moments::of(&column(j, |r| &r.tdp));
            AlphaSummary {
                alpha,
                fcp,
                fdp: Some(fdp),
                tdp: Some(tdp),
                fdp_scaled_sd: Some(root_tau * fdp.var.sqrt()),
                tdp_scaled_sd: Some(root_tau * tdp.var.sqrt()),
                bh_threshold_mean: Some(Moments::of(&column(j, |r| &r.bh_threshold)).mean),
            }
        })
        .collect();
    Ok(Summary {
        reps: records.len(),
        sup,
        per_alpha,
    })
}

fn theory_overlay(cfg: &ExperimentConfig) -> Result<TheoryOverlay> {
    let regime = AsymptoticRegime::new(cfg.n, cfg.m)?;
    let theory = TheoryFunctions::new(&theory_scenario(cfg))?;
    let band = if cfg.mode.is_bh() {
        None
    } else {
        Some(fcp_uniform_band(cfg.n, cfg.m, cfg.delta)?)
    };
    let fcp = if cfg.mode.is_bh() {
        Vec::new()
    } else {
        cfg.alphas
            .iter()
            .map(|&a| fcp_pointwise_ci(a, 1.0 - cfg.delta, &regime, &theory))
            .collect::<Result<Vec<_>>>()?
    };
    let bh = if cfg.mode.is_bh() {
        let mode = moment_mode(cfg, &theory)?;
        cfg.alphas
            .iter()
            .map(
                |&alpha| match fdp_tdp_asymptotics(alpha, &regime, &theory, mode) {
                    Ok(m) => Ok(BhOverlay {
                        alpha,
                        moments: Some(m),
                        note: None,
                    }),
                    Err(e @ (Error::Subcritical { .. } | Error::AssumptionViolation(_))) => {
                        Ok(BhOverlay {
                            alpha,
                            moments: None,
                            note: Some(e.to_string()),
                        })
                    }
                    Err(e) => Err(e),
                },
            )
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(TheoryOverlay {
        regime,
        band,
        fcp,
        bh,
    })
}

/// Moment formulas matching a BH experiment: unweighted when the null law is
/// the calibration law, oracle-weighted when the weight makes null p-values
/// uniform, general otherwise.
fn moment_mode(cfg: &ExperimentConfig, theory: &TheoryFunctions) -> Result<MomentMode> {
    let sc = &cfg.scenario;
    if !cfg.mode.is_weighted() {
        return Ok(if sc.null_dist == Some(sc.cal) {
            MomentMode::Unweighted
        } else {
            MomentMode::GeneralWeighted
        });
    }
    for k in 1..10 {
        let u = k as f64 / 10.0;
        if (theory.g0w(u)? - u).abs() > 1e-6 {
            return Ok(MomentMode::GeneralWeighted);
        }
    }
    Ok(MomentMode::OracleWeighted)
}

/// Writes `records.csv` and `summary.json` into `dir` (created if needed).
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("records.csv"))?;
    let mut header = vec!["rep".to_string(), "sup_stat".to_string()];
    let cols: &[&str] = if result.config.mode.is_bh() {
        &["fcp", "fdp", "tdp", "bh_threshold", "k_hat"]
    } else {
        &["fcp"]
    };
    for c in cols {
        for a in &result.config.alphas {
            header.push(format!("{c}@{a}"));
        }
    }
    w.write_record(&header)?;
    for r in &result.records {
        let mut row = vec![
            r.rep.to_string(),
            r.sup_stat.map(|s| s.to_string()).unwrap_or_default(),
        ];
        row.extend(r.fcp.iter().map(f64::to_string));
        if result.config.mode.is_bh() {
            row.extend(r.fdp.iter().map(f64::to_string));
            row.extend(r.tdp.iter().map(f64::to_string));
            row.extend(r.bh_threshold.iter().map(f64::to_string));
            row.extend(r.k_hat.iter().map(usize::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    #[derive(Serialize)]
    struct SummaryDoc<'a> {
        schema_version: u32,
        config: &'a ExperimentConfig,
        summary: &'a Summary,
        theory: &'a TheoryOverlay,
    }
    let doc = SummaryDoc {
        schema_version: result.schema_version,
        config: &result.config,
        summary: &result.summary,
        theory: &result.theory,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    std::fs::write(dir.join("summary.json"), text)?;
    Ok(())
}
