//! `confasym` command-line front end.
//!
//! Data goes to stdout (JSON) or to the named output files (CSV); logs and
//! errors go to stderr. Exit codes: 0 ok, 2 input error, 3 assumption
//! violation (including a subcritical level), 4 internal error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use confasym::conformal::Calibration;
use confasym::empirical::bh_reject;
use confasym::limits::{
    fcp_pointwise_ci, fcp_uniform_band, fdp_tdp_asymptotics, AsymptoticRegime, MomentMode,
    ScenarioSpec, TheoryFunctions,
};
use confasym::simulate::{
    reproduce_fig1, reproduce_fig2, run_experiment, with_workers, write_outputs, ExperimentConfig,
    DEFAULT_SEED, FIG2_ALPHA,
};
use confasym::{io, Error, Result, WeightSpec, SCHEMA_VERSION};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "confasym",
    version,
    about = "Conformal p-values, FCP/FDP asymptotics and Monte Carlo checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conformal (or weighted conformal) p-values of test scores.
    Pvalues {
        /// CSV with a `score` column.
        #[arg(long)]
        cal: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// JSON weight specification; plain conformal p-values when absent.
        #[arg(long)]
        weight: Option<PathBuf>,
        /// Output CSV with columns `index,p_value`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Uniform confidence band half-widths for the FCP process.
    Band {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Pointwise asymptotic intervals for FCP(alpha).
    Ci {
        /// JSON scenario specification.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Miscoverage levels (repeat or comma-separate).
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 0.9)]
        level: f64,
    },
    /// Benjamini-Hochberg on a p-value file.
    Bh {
        /// CSV with columns `index,p_value`.
        #[arg(long)]
        pvalues: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Limit curves and BH limit moments of a scenario.
    Theory {
        #[command(subcommand)]
        command: TheoryCommand,
    },
    /// Run a Monte Carlo experiment from a JSON configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for `records.csv` and `summary.json`.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the configuration's `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Sup-statistic quantiles: Monte Carlo vs Kolmogorov vs DKW.
    Fig1 {
        #[arg(long, value_delimiter = ',', default_values_t = [500usize])]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [100usize, 300, 1000])]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.2])]
        delta: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        workers: Workers,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Weighted FCP under an exponential shift as the tilt leaves the oracle.
    Fig2 {
        /// Offsets of the tilt rate from 2; defaults to -0.5..=0.5 by 0.05.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        shift: Vec<f64>,
        #[arg(long, default_value_t = FIG2_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 0.8)]
        level: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        m: usize,
        /// Monte Carlo replications; analytic columns only when absent.
        #[arg(long)]
        mc_reps: Option<usize>,
        /// Weight mass at +infinity.
        #[arg(long, default_value_t = 1.0)]
        w_inf: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        workers: Workers,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// Limit curves on a regular grid, as CSV on stdout.
    Dump {
        #[arg(long)]
        scenario: PathBuf,
        /// Number of interior grid points k/(grid+1).
        #[arg(long, default_value_t = 99)]
        grid: usize,
        /// Force numerical quadrature even where a closed form exists.
        #[arg(long)]
        quadrature: bool,
    },
    /// FDP/TDP limit moments of BH at level alpha, as JSON.
    Moments {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::General)]
        mode: ModeArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Unweighted,
    Oracle,
    General,
}

impl From<ModeArg> for MomentMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Unweighted => MomentMode::Unweighted,
            ModeArg::Oracle => MomentMode::OracleWeighted,
            ModeArg::General => MomentMode::GeneralWeighted,
        }
    }
}

#[derive(Args)]
struct Workers {
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("JSON values always serialise")
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pvalues {
            cal,
            test,
            weight,
            out,
        } => {
            let cal = io::read_scores(&cal)?;
            let test = io::read_scores(&test)?;
            let calibration = match &weight {
                Some(p) => {
                    let w: WeightSpec = read_json(p)?;
                    log::info!("n = {}, m = {}, weight = {w}", cal.len(), test.len());
                    Calibration::weighted(&cal, &w)?
                }
                None => {
                    log::info!("n = {}, m = {}, unweighted", cal.len(), test.len());
                    Calibration::new(&cal)?
                }
            };
            io::write_pvalues(&out, &calibration.pvalues(&test)?)
        }
        Command::Band { n, m, delta } => {
            let b = fcp_uniform_band(n, m, delta)?;
            print_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "tau": b.tau,
                "sigma2": b.sigma2,
                "asymptotic_halfwidth": b.asymptotic_halfwidth,
                "dkw_halfwidth": b.dkw_halfwidth,
            }));
            Ok(())
        }
        Command::Ci {
            scenario,
            n,
            m,
            alpha,
            level,
        } => {
            let sc: ScenarioSpec = read_json(&scenario)?;
            sc.validate()?;
            let theory = TheoryFunctions::new(&sc)?;
            let regime = AsymptoticRegime::new(n, m)?;
            let intervals = alpha
                .iter()
                .map(|&a| fcp_pointwise_ci(a, level, &regime, &theory))
                .collect::<Result<Vec<_>>>()?;
            print_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "regime": regime,
                "intervals": intervals,
            }));
            Ok(())
        }
        Command::Bh { pvalues, alpha } => {
            let p = io::read_pvalues(&pvalues)?;
            let out = bh_reject(&p, alpha)?;
            print_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "alpha": alpha,
                "m": p.len(),
                "threshold": out.threshold,
                "k_hat": out.k_hat,
                "rejected": out.rejected,
            }));
            Ok(())
        }
        Command::Theory { command } => run_theory(command),
        Command::Simulate {
            config,
            out,
            seed,
            workers,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
            let mut cfg = ExperimentConfig::from_json_str(&text)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            log::info!(
                "mode {:?}, n = {}, m = {}, reps = {}, seed = {}",
                cfg.mode,
                cfg.n,
                cfg.m,
                cfg.reps,
                cfg.master_seed
            );
            let res = with_workers(workers.workers, || run_experiment(&cfg))??;
            write_outputs(&res, &out)?;
            let s = &res.summary;
            let mut line = format!("{} replications", s.reps);
            if let Some(sup) = &s.sup {
                line += &format!(
                    ", sup quantile {:.5} (scaled {:.4}), band coverage {:.4}",
                    sup.quantile, sup.scaled_quantile, sup.band_coverage
                );
            }
            for a in &s.per_alpha {
                line += &format!(", FCP({}) mean {:.5}", a.alpha, a.fcp.mean);
                if let Some(f) = &a.fdp {
                    line += &format!(", FDP mean {:.5}", f.mean);
                }
            }
            println!("{line}");
            Ok(())
        }
        Command::Fig1 {
            n,
            m,
            delta,
            reps,
            seed,
            workers,
            out,
        } => {
            let rows = with_workers(workers.workers, || {
                reproduce_fig1(&n, &m, &delta, reps, seed)
            })??;
            let mut w = csv::Writer::from_path(&out)?;
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            log::info!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Fig2 {
            shift,
            alpha,
            level,
            n,
            m,
            mc_reps,
            w_inf,
            seed,
            workers,
            out,
        } => {
            let shifts = if shift.is_empty() {
                (0..=20).map(|k| -0.5 + 0.05 * k as f64).collect()
            } else {
                shift
            };
            let rows = with_workers(workers.workers, || {
                reproduce_fig2(&shifts, alpha, level, n, m, mc_reps, seed, w_inf)
            })??;
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record([
                "shift",
                "alpha",
                "mean",
                "mean_quadrature",
                "ci_lo",
                "ci_hi",
                "mc_reps",
                "mc_mean",
                "mc_sd",
                "mc_q_lo",
                "mc_q_hi",
                "mc_inside",
            ])?;
            for r in &rows {
                let mut rec = vec![
                    r.shift.to_string(),
                    r.alpha.to_string(),
                    r.mean.to_string(),
                    r.mean_quadrature.to_string(),
                    r.ci_lo.to_string(),
                    r.ci_hi.to_string(),
                ];
                match &r.mc {
                    Some(mc) => rec.extend([
                        mc.reps.to_string(),
                        mc.mean.to_string(),
                        mc.sd.to_string(),
                        mc.q_lo.to_string(),
                        mc.q_hi.to_string(),
                        mc.inside.to_string(),
                    ]),
                    None => rec.extend(std::iter::repeat_n(String::new(), 6)),
                }
                w.write_record(&rec)?;
            }
            w.flush()?;
            log::info!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
    }
}

fn run_theory(command: TheoryCommand) -> Result<()> {
    match command {
        TheoryCommand::Dump {
            scenario,
            grid,
            quadrature,
        } => {
            let sc: ScenarioSpec = read_json(&scenario)?;
            sc.validate()?;
            let th = if quadrature {
                TheoryFunctions::quadrature(&sc)?
            } else {
                TheoryFunctions::new(&sc)?
            };
            if grid == 0 {
                return Err(Error::Domain("grid must be at least 1".into()));
            }
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            let mut header = vec!["t", "g", "g_prime", "gw", "gw_prime", "iw"];
            if sc.is_novelty() {
                header.extend(["g0", "g0w", "gmixt", "gmixtw"]);
            }
            w.write_record(&header)?;
            for k in 1..=grid {
                let t = k as f64 / (grid + 1) as f64;
                let mut row = vec![
                    t,
                    th.g(t),
                    th.g_prime(t),
                    th.gw(t),
                    th.gw_prime(t),
                    th.iw(t),
                ];
                if sc.is_novelty() {
                    row.extend([th.g0(t)?, th.g0w(t)?, th.gmixt(t)?, th.gmixtw(t)?]);
                }
                w.write_record(row.iter().map(f64::to_string))?;
            }
            w.flush()?;
            Ok(())
        }
        TheoryCommand::Moments {
            scenario,
            n,
            m,
            alpha,
            mode,
        } => {
            let sc: ScenarioSpec = read_json(&scenario)?;
            sc.validate()?;
            let th = TheoryFunctions::new(&sc)?;
            let regime = AsymptoticRegime::new(n, m)?;
            let mo = fdp_tdp_asymptotics(alpha, &regime, &th, mode.into())?;
            print_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "regime": regime,
                "moments": mo,
            }));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "error": e.kind(),
                "message": e.to_string(),
            });
            eprintln!("{report}");
            ExitCode::from(if e.is_assumption() { 3 } else { 2 })
        }
        Err(_) => ExitCode::from(4),
    }
}
