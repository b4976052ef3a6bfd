//! Acceptance run: ten numbered criteria, one PASS/FAIL line each.
//!
//! Built with `harness = false` so the lines are always printed. The process
//! exits nonzero if any criterion fails. Every Monte Carlo check uses the
//! library's default master seed.

use confasym::conformal::{standardize, Calibration};
use confasym::empirical::{bh_reject, bh_threshold_functional, ecdf};
use confasym::limit_sampler::{limit_sup_quantile, LimitKind};
use confasym::limits::{
    bh_asymptotic_threshold, fcp_pointwise_ci, fdp_tdp_asymptotics, kolmogorov_quantile,
    AsymptoticRegime, MomentMode, ScenarioSpec, TheoryFunctions,
};
use confasym::simulate::{
    reproduce_fig1, reproduce_fig2, run_experiment, with_workers, ExperimentConfig,
    ExperimentResult, Mode, DEFAULT_SEED,
};
use confasym::{
    oracle_weight, DistributionSpec, SeededRng, WeightKind, WeightSpec, SCHEMA_VERSION,
};
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn exp(rate: f64) -> DistributionSpec {
    DistributionSpec::exponential(rate).unwrap()
}

fn config(
    mode: Mode,
    scenario: ScenarioSpec,
    n: usize,
    m: usize,
    alphas: Vec<f64>,
    reps: usize,
) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        mode,
        scenario,
        n,
        m,
        alphas,
        delta: 0.05,
        reps,
        master_seed: DEFAULT_SEED,
    }
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult, String> {
    run_experiment(cfg).map_err(|e| e.to_string())
}

/// Collects failed conditions of one criterion.
#[derive(Default)]
struct Verdict {
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Verdict {
    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn finish(self) -> Check {
        if self.failures.is_empty() {
            Ok(self.notes.join("; "))
        } else {
            Err(format!(
                "failed: {} | passed: {}",
                self.failures.join("; "),
                self.notes.join("; ")
            ))
        }
    }
}

// ---------------------------------------------------------------- 1

/// Brute-force oracle: 100000 series terms, no early exit, then plain
/// bisection.
fn oracle_kolmogorov_quantile(p: f64) -> f64 {
    let cdf = |x: f64| {
        let mut s = 0.0;
        for k in (1..=100_000u32).rev() {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * (-2.0 * kf * kf * x * x).exp();
        }
        1.0 - 2.0 * s
    };
    let (mut lo, mut hi) = (0.5, 3.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_1() -> Check {
    let mut v = Verdict::default();
    for (p, published) in [(0.95, 1.3581), (0.99, 1.6276)] {
        let q = kolmogorov_quantile(p).map_err(|e| e.to_string())?;
        let oracle = oracle_kolmogorov_quantile(p);
        v.check(
            (q - published).abs() <= 1e-3,
            format!("q({p}) = {q:.6} vs {published} (tol 1e-3)"),
        );
        v.check(
            (q - oracle).abs() <= 1e-9,
            format!(
                "brute-force oracle {oracle:.10} (diff {:.1e})",
                (q - oracle).abs()
            ),
        );
    }
    v.finish()
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Check {
    let u = DistributionSpec::Uniform01;
    let res = run(&config(
        Mode::FcpSup,
        ScenarioSpec::prediction(u, u),
        1000,
        1000,
        vec![0.1],
        5000,
    ))?;
    let sup = res.summary.sup.ok_or("no sup summary")?;
    let mut v = Verdict::default();
    v.check(
        (sup.scaled_quantile - 1.3581).abs() <= 0.06,
        format!(
            "sqrt(tau) * q_0.95 = {:.4} vs 1.3581 (tol 0.06)",
            sup.scaled_quantile
        ),
    );
    v.check(
        (0.93..=0.97).contains(&sup.band_coverage),
        format!("band coverage {:.4} in [0.93, 0.97]", sup.band_coverage),
    );
    v.finish()
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Check {
    let rows = reproduce_fig1(&[500], &[100, 300, 1000], &[0.05, 0.2], 1000, DEFAULT_SEED)
        .map_err(|e| e.to_string())?;
    let mut v = Verdict::default();
    for r in &rows {
        let cell = format!("n={} m={} delta={}", r.n, r.m, r.delta);
        v.check(
            r.dkw >= r.mc_quantile - 2.0 * r.mc_quantile_se,
            format!(
                "{cell}: dkw {:.4} >= mc {:.4} - 2*{:.4}",
                r.dkw, r.mc_quantile, r.mc_quantile_se
            ),
        );
        if r.tau >= 200.0 {
            let rel = (r.mc_quantile - r.asymptotic).abs() / r.asymptotic;
            v.check(
                rel < 0.10,
                format!("{cell}: |mc - asym|/asym = {rel:.4} < 0.10"),
            );
        }
    }
    v.finish()
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Check {
    let u = DistributionSpec::Uniform01;
    let (n, m, alpha) = (2000, 2000, 0.2);
    let res = run(&config(
        Mode::FcpPointwise,
        ScenarioSpec::prediction(u, u),
        n,
        m,
        vec![alpha],
        5000,
    ))?;
    let var = res.summary.per_alpha[0].fcp.var;
    let ratio = m as f64 * var / (alpha * (1.0 - alpha));
    let mut v = Verdict::default();
    v.check(
        (1.8..=2.2).contains(&ratio),
        format!("m Var(FCP)/(alpha(1-alpha)) = {ratio:.4} in [1.8, 2.2] (target (n+m)/n = 2)"),
    );
    v.finish()
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Check {
    let shifts: Vec<f64> = (0..=20).map(|k| -0.5 + 0.05 * k as f64).collect();
    let alpha = 0.2;
    let rows = reproduce_fig2(
        &shifts,
        alpha,
        0.8,
        2000,
        2000,
        Some(2000),
        DEFAULT_SEED,
        1.0,
    )
    .map_err(|e| e.to_string())?;
    let mut v = Verdict::default();
    let mut worst_closed: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    for r in &rows {
        let oracle = alpha.powf(3.0 / (3.0 + r.shift));
        worst_closed = worst_closed.max((r.mean - oracle).abs());
        worst_quad = worst_quad.max((r.mean_quadrature - oracle).abs());
    }
    v.check(
        worst_closed <= 1e-10,
        format!("closed form vs alpha^(3/(3+D)): {worst_closed:.1e}"),
    );
    v.check(
        worst_quad <= 1e-10,
        format!("quadrature vs alpha^(3/(3+D)): {worst_quad:.1e}"),
    );
    let zero = rows
        .iter()
        .find(|r| r.shift == 0.0)
        .ok_or("no zero-shift row")?;
    v.check(
        zero.mean == alpha,
        format!("zero-shift mean {} == {alpha}", zero.mean),
    );
    let inside = rows
        .iter()
        .filter(|r| r.mc.is_some_and(|m| m.inside))
        .count();
    let share = inside as f64 / rows.len() as f64;
    v.check(
        share >= 0.70,
        format!("MC mean inside 80% CI for {inside}/{} shifts", rows.len()),
    );
    v.finish()
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Check {
    let (alpha, pi0, s2) = (0.2, 0.8, 0.5);
    let sc = ScenarioSpec::novelty(exp(1.0), exp(1.0), exp(0.5), pi0);
    let th = TheoryFunctions::new(&sc).map_err(|e| e.to_string())?;
    // sqrt(t) (1 - pi0) = t (1/alpha - pi0)  =>  sqrt(T) = (1 - pi0)/(1/alpha - pi0)
    let root_t = (1.0 - pi0) / (1.0 / alpha - pi0);
    let t_oracle = root_t * root_t;
    let fdp_var_oracle =
        alpha * alpha * pi0 * (s2 + (1.0 - s2) * pi0) * (1.0 - t_oracle) / t_oracle;
    let mut v = Verdict::default();
    let t = bh_asymptotic_threshold(alpha, &th, false).map_err(|e| e.to_string())?;
    v.check(
        (t - 1.0 / 441.0).abs() <= 1e-8 && (t - t_oracle).abs() <= 1e-8,
        format!("T_alpha = {t:.10} vs 1/441"),
    );
    v.check(
        (fdp_var_oracle - 12.672).abs() < 1e-9,
        format!("plug-in oracle variance {fdp_var_oracle:.6}"),
    );
    let res = run(&config(Mode::BhFdp, sc, 4000, 4000, vec![alpha], 3000))?;
    let a = &res.summary.per_alpha[0];
    let fdp = a.fdp.ok_or("no FDP summary")?;
    let tdp = a.tdp.ok_or("no TDP summary")?;
    let sd = a.fdp_scaled_sd.ok_or("no scaled SD")?;
    v.check(
        (fdp.mean - 0.16).abs() <= 0.01,
        format!("mean FDP {:.4} vs 0.16", fdp.mean),
    );
    let target = fdp_var_oracle.sqrt();
    v.check(
        (sd - target).abs() <= 0.15 * target,
        format!("sqrt(tau) SD(FDP) {sd:.4} vs {target:.4} (15%)"),
    );
    v.check(
        (tdp.mean - root_t).abs() <= 0.01,
        format!("mean TDP {:.4} vs 1/21 = {root_t:.4}", tdp.mean),
    );
    v.finish()
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Check {
    let mut v = Verdict::default();
    let shift = ScenarioSpec::prediction(exp(1.0), exp(3.0));
    let oracles = [
        (
            "density ratio",
            oracle_weight(&exp(1.0), &exp(3.0)).map_err(|e| e.to_string())?,
        ),
        (
            "exp tilt 2",
            WeightSpec::exp_tilt(2.0).map_err(|e| e.to_string())?,
        ),
    ];
    for (name, w) in oracles {
        for quad in [false, true] {
            let sc = shift.clone().with_weight(w.clone());
            let th = if quad {
                TheoryFunctions::quadrature(&sc)
            } else {
                TheoryFunctions::new(&sc)
            }
            .map_err(|e| e.to_string())?;
            let dev = (1..=99)
                .map(|k| {
                    let t = k as f64 / 100.0;
                    (th.gw(t) - t).abs()
                })
                .fold(0.0, f64::max);
            let route = if quad { "quadrature" } else { "default" };
            v.check(
                dev <= 1e-8,
                format!("{name} ({route}): max |G^w - I| = {dev:.1e}"),
            );
        }
    }

    // Constant(1) weights against the unweighted formulas.
    let one = WeightSpec::constant(1.0).map_err(|e| e.to_string())?;
    let regime = AsymptoticRegime::new(1500, 2500).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut track = |a: f64, b: f64| worst = worst.max((a - b).abs());
    for sc in [
        ScenarioSpec::prediction(exp(1.0), exp(0.5)),
        ScenarioSpec::prediction(exp(1.0), exp(2.0)),
    ] {
        let plain = TheoryFunctions::new(&sc).map_err(|e| e.to_string())?;
        let weighted = TheoryFunctions::new(&sc.clone().with_weight(one.clone()))
            .map_err(|e| e.to_string())?;
        for k in 1..=19 {
            let a = k as f64 / 20.0;
            let p = fcp_pointwise_ci(a, 0.9, &regime, &plain).map_err(|e| e.to_string())?;
            let w = fcp_pointwise_ci(a, 0.9, &regime, &weighted).map_err(|e| e.to_string())?;
            track(p.mean, w.mean);
            track(p.variance * regime.tau, w.variance * regime.tau);
        }
    }
    let nov = ScenarioSpec::novelty(exp(1.0), exp(1.0), exp(0.4), 0.7);
    let plain = TheoryFunctions::new(&nov).map_err(|e| e.to_string())?;
    let weighted =
        TheoryFunctions::new(&nov.clone().with_weight(one)).map_err(|e| e.to_string())?;
    for alpha in [0.05, 0.1, 0.2, 0.3] {
        let t0 = bh_asymptotic_threshold(alpha, &plain, false).map_err(|e| e.to_string())?;
        let t1 = bh_asymptotic_threshold(alpha, &weighted, true).map_err(|e| e.to_string())?;
        track(t0, t1);
        let u = fdp_tdp_asymptotics(alpha, &regime, &plain, MomentMode::Unweighted)
            .map_err(|e| e.to_string())?;
        for mode in [MomentMode::OracleWeighted, MomentMode::GeneralWeighted] {
            let w =
                fdp_tdp_asymptotics(alpha, &regime, &weighted, mode).map_err(|e| e.to_string())?;
            track(u.threshold, w.threshold);
            track(u.fdp_mean, w.fdp_mean);
            track(u.fdp_var_scaled, w.fdp_var_scaled);
            track(u.tdp_mean, w.tdp_mean);
            track(u.tdp_var_scaled, w.tdp_var_scaled);
        }
    }
    v.check(
        worst <= 1e-10,
        format!("Constant(1) vs unweighted (CI mean/variance, thresholds, Xi, Sigma): max diff {worst:.1e}"),
    );
    v.finish()
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Check {
    let mut v = Verdict::default();
    let alpha = 0.2;
    for shift in [-0.5, 0.5] {
        let w = WeightSpec::exp_tilt(2.0 + shift).map_err(|e| e.to_string())?;
        let sc = ScenarioSpec::novelty(exp(1.0), exp(3.0), exp(1.25), 0.5).with_weight(w);
        let cfg = config(Mode::WeightedBh, sc.clone(), 4000, 4000, vec![alpha], 3000);
        let res = run(&cfg)?;
        let th = TheoryFunctions::new(&sc).map_err(|e| e.to_string())?;
        let mo = fdp_tdp_asymptotics(alpha, &res.theory.regime, &th, MomentMode::GeneralWeighted)
            .map_err(|e| e.to_string())?;
        let a = &res.summary.per_alpha[0];
        let fdp = a.fdp.ok_or("no FDP summary")?;
        let mc_var = res.theory.regime.tau * fdp.var;
        v.check(
            (fdp.mean - mo.fdp_mean).abs() <= 0.015,
            format!(
                "shift {shift}: FDP mean MC {:.4} vs p(T) {:.4}",
                fdp.mean, mo.fdp_mean
            ),
        );
        v.check(
            (mc_var - mo.fdp_var_scaled).abs() <= 0.20 * mo.fdp_var_scaled,
            format!(
                "shift {shift}: tau Var(FDP) MC {mc_var:.4} vs {:.4} (20%)",
                mo.fdp_var_scaled
            ),
        );
    }
    v.finish()
}

// ---------------------------------------------------------------- 9

/// Brute-force weighted p-value: direct sum over the calibration sample.
fn oracle_pvalue(cal: &[f64], w: &WeightSpec, t: f64) -> f64 {
    let total: f64 = w.w_inf() + cal.iter().map(|&s| w.eval(s).unwrap()).sum::<f64>();
    let above: f64 = w.w_inf()
        + cal
            .iter()
            .filter(|&&s| s >= t)
            .map(|&s| w.eval(s).unwrap())
            .sum::<f64>();
    above / total
}

/// Brute-force upper end of the prediction set: the smallest calibration
/// point (or +inf) whose cumulative normalised mass reaches `1 - alpha`.
fn oracle_set_upper(cal: &[f64], w: &WeightSpec, alpha: f64) -> f64 {
    let total: f64 = w.w_inf() + cal.iter().map(|&s| w.eval(s).unwrap()).sum::<f64>();
    let mut pts: Vec<f64> = cal.to_vec();
    pts.sort_by(f64::total_cmp);
    for &x in &pts {
        let below: f64 = cal
            .iter()
            .filter(|&&s| s <= x)
            .map(|&s| w.eval(s).unwrap())
            .sum::<f64>();
        if below / total >= 1.0 - alpha {
            return x;
        }
    }
    f64::INFINITY
}

fn random_table(rng: &mut SeededRng) -> WeightSpec {
    let k = 1 + rng.index(4);
    let mut bps: Vec<f64> = (0..k).map(|_| 3.0 * rng.open01()).collect();
    bps.sort_by(f64::total_cmp);
    let values: Vec<f64> = (0..=k).map(|_| 0.1 + 4.0 * rng.open01()).collect();
    let w_inf = 0.1 + 4.0 * rng.open01();
    WeightSpec::with_w_inf(
        WeightKind::Table {
            breakpoints: bps,
            values,
        },
        w_inf,
    )
    .unwrap()
}

fn criterion_9() -> Check {
    let mut v = Verdict::default();
    let mut rng = SeededRng::new(DEFAULT_SEED, 9);

    // Duality: p(t) <= alpha  <=>  t lies outside the prediction set.
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = 1 + rng.index(40);
        let cal: Vec<f64> = (0..n).map(|_| 3.0 * rng.open01()).collect();
        let t = 3.0 * rng.open01();
        let alpha = rng.open01();
        let w = if rng.index(4) == 0 {
            WeightSpec::constant(1.0).unwrap()
        } else {
            random_table(&mut rng)
        };
        let calib = Calibration::weighted(&cal, &w).map_err(|e| e.to_string())?;
        let p = calib.pvalue(t).map_err(|e| e.to_string())?;
        let q = calib.threshold(alpha).map_err(|e| e.to_string())?;
        let p_oracle = oracle_pvalue(&cal, &w, t);
        let q_oracle = oracle_set_upper(&cal, &w, alpha);
        let claims = [p <= alpha, t > q, p_oracle <= alpha, t > q_oracle];
        if claims.iter().any(|&c| c != claims[0]) {
            mismatches += 1;
        }
    }
    v.check(
        mismatches == 0,
        format!("duality: {mismatches}/1000 mismatching triples"),
    );

    // Standardisation leaves (weighted) p-values unchanged.
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let rate = 0.3 + 3.0 * rng.open01();
        let spec = exp(rate);
        let (n, m) = (1 + rng.index(60), 1 + rng.index(30));
        let cal = spec.sample(&mut rng, n);
        let test = exp(rate * (0.5 + rng.open01())).sample(&mut rng, m);
        let w = match rng.index(3) {
            0 => WeightSpec::exp_tilt(3.0 * rng.open01()).unwrap(),
            1 => random_table(&mut rng),
            _ => WeightSpec::constant(0.5 + rng.open01()).unwrap(),
        };
        let before = Calibration::weighted(&cal, &w).and_then(|c| c.pvalues(&test));
        let (c2, t2, w2) = standardize(&cal, &test, &w, &spec).map_err(|e| e.to_string())?;
        let after = Calibration::weighted(&c2, &w2).and_then(|c| c.pvalues(&t2));
        match (before, after) {
            (Ok(a), Ok(b)) => {
                for (x, y) in a.values.iter().zip(&b.values) {
                    worst = worst.max((x - y).abs());
                }
            }
            (a, b) => {
                return Err(format!(
                    "standardisation changed the outcome: {a:?} vs {b:?}"
                ))
            }
        }
    }
    v.check(
        worst <= 1e-12,
        format!("standardisation: max |dp| = {worst:.1e} over 200 problems"),
    );

    // BH step-up vs the threshold functional, against a brute-force count.
    let mut bad = 0;
    for _ in 0..500 {
        let m = 1 + rng.index(60);
        let alpha = 0.01 + 0.5 * rng.open01();
        let p: Vec<f64> = if rng.index(2) == 0 {
            let n = 1 + rng.index(20);
            (0..m)
                .map(|_| (1 + rng.index(n + 1)) as f64 / (n + 1) as f64)
                .collect()
        } else {
            (0..m).map(|_| rng.open01().powi(3)).collect()
        };
        let k_oracle = (1..=m)
            .rev()
            .find(|&k| {
                p.iter()
                    .filter(|&&x| x <= alpha * (k as f64 / m as f64))
                    .count()
                    >= k
            })
            .unwrap_or(0);
        let out = bh_reject(&p, alpha).map_err(|e| e.to_string())?;
        let t = bh_threshold_functional(&ecdf(&p).map_err(|e| e.to_string())?, alpha);
        let via_functional = p.iter().filter(|&&x| x <= t).count();
        if out.k_hat != k_oracle || out.rejected.len() != k_oracle || via_functional != k_oracle {
            bad += 1;
        }
    }
    v.check(
        bad == 0,
        format!("BH step-up = functional = brute force: {bad}/500 mismatches"),
    );

    // Weight scaling: exact for powers of two, 1e-12 otherwise.
    let (mut exact_bad, mut worst) = (0, 0.0f64);
    for _ in 0..300 {
        let cal: Vec<f64> = (0..1 + rng.index(50)).map(|_| 3.0 * rng.open01()).collect();
        let test: Vec<f64> = (0..10).map(|_| 3.0 * rng.open01()).collect();
        let w = random_table(&mut rng);
        let base = Calibration::weighted(&cal, &w)
            .and_then(|c| c.pvalues(&test))
            .map_err(|e| e.to_string())?;
        let two = w
            .scaled(2f64.powi(rng.index(9) as i32 - 4))
            .map_err(|e| e.to_string())?;
        let p2 = Calibration::weighted(&cal, &two)
            .and_then(|c| c.pvalues(&test))
            .map_err(|e| e.to_string())?;
        if p2 != base {
            exact_bad += 1;
        }
        let any = w
            .scaled(0.1 + 10.0 * rng.open01())
            .map_err(|e| e.to_string())?;
        let pa = Calibration::weighted(&cal, &any)
            .and_then(|c| c.pvalues(&test))
            .map_err(|e| e.to_string())?;
        for (x, y) in base.values.iter().zip(&pa.values) {
            worst = worst.max((x - y).abs());
        }
    }
    v.check(
        exact_bad == 0,
        format!("power-of-two scaling: {exact_bad}/300 not bit-identical"),
    );
    v.check(
        worst <= 1e-12,
        format!("arbitrary scaling: max |dp| = {worst:.1e}"),
    );

    // Determinism across worker counts.
    let nov = ScenarioSpec::novelty(exp(1.0), exp(3.0), exp(1.25), 0.5)
        .with_weight(WeightSpec::exp_tilt(2.0).map_err(|e| e.to_string())?);
    let configs = [
        config(Mode::WeightedBh, nov, 300, 200, vec![0.1, 0.2], 64),
        config(
            Mode::FcpSup,
            ScenarioSpec::prediction(exp(1.0), exp(2.0)),
            300,
            200,
            vec![0.1, 0.5],
            64,
        ),
    ];
    let mut same = true;
    for cfg in &configs {
        let a = with_workers(1, || run_experiment(cfg)).map_err(|e| e.to_string())?;
        let b = with_workers(4, || run_experiment(cfg)).map_err(|e| e.to_string())?;
        same &= a == b;
    }
    let fig = |k| {
        with_workers(k, || {
            reproduce_fig2(&[-0.2, 0.0, 0.3], 0.2, 0.8, 200, 200, Some(50), 7, 1.0)
        })
    };
    same &= fig(1).map_err(|e| e.to_string())? == fig(4).map_err(|e| e.to_string())?;
    v.check(same, "workers 1 vs 4: identical results".into());
    v.finish()
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Check {
    let e = exp(1.0);
    let th = TheoryFunctions::new(&ScenarioSpec::prediction(e, e)).map_err(|e| e.to_string())?;
    let rng = SeededRng::new(DEFAULT_SEED, 0);
    let q = limit_sup_quantile(LimitKind::ShiftFcp, &th, 0.5, 0.05, 100_000, 4096, &rng)
        .map_err(|e| e.to_string())?;
    let target = kolmogorov_quantile(0.95).map_err(|e| e.to_string())?;
    let rel = (q.quantile - target).abs() / target;
    let mut v = Verdict::default();
    v.check(
        rel <= 0.01,
        format!(
            "sampled q_0.95 = {:.4} (bootstrap SE {:.4}) vs {target:.4}: rel diff {rel:.4}",
            q.quantile, q.bootstrap_se
        ),
    );
    v.finish()
}

/// Number, name, runtime budget and body of one criterion.
type Criterion = (u32, &'static str, Duration, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            1,
            "Kolmogorov quantiles",
            Duration::from_secs(1),
            criterion_1,
        ),
        (
            2,
            "sup statistic, exchangeable scores",
            Duration::from_secs(120),
            criterion_2,
        ),
        (
            3,
            "quantile table ordering (MC / asymptotic / DKW)",
            Duration::from_secs(300),
            criterion_3,
        ),
        (
            4,
            "variance inflation (n+m)/n",
            Duration::from_secs(300),
            criterion_4,
        ),
        (
            5,
            "weighted FCP under exponential shift",
            Duration::from_secs(300),
            criterion_5,
        ),
        (
            6,
            "BH FDP/TDP limits, sqrt alternative",
            Duration::from_secs(300),
            criterion_6,
        ),
        (
            7,
            "oracle identity and Constant(1) reduction",
            Duration::from_secs(300),
            criterion_7,
        ),
        (
            8,
            "general-weight FDP limits vs simulation",
            Duration::from_secs(300),
            criterion_8,
        ),
        (
            9,
            "exact property suites",
            Duration::from_secs(300),
            criterion_9,
        ),
        (
            10,
            "limit sampler vs Kolmogorov",
            Duration::from_secs(60),
            criterion_10,
        ),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} budget", budget)),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} {name} [{:.1}s] {detail}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
