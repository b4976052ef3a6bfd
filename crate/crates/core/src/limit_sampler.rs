//! Sampling the Gaussian limit processes on a grid.
//!
//! Brownian bridges are built from cumulative Gaussian increments,
//! `B(s) = W(s) - s W(1)`, which also gives bridges evaluated along a
//! nondecreasing time change such as `U(G(t))`. Each path draws from its own
//! random stream (stream index = path index), so replicated runs are
//! reproducible regardless of how paths are spread across threads.

use crate::error::{check_probability_open, Error, Result};
use crate::limits::TheoryFunctions;
use crate::rng::SeededRng;
use crate::simulate::empirical_quantile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Stream offset reserved for bootstrap resampling, far above any path index.
const BOOTSTRAP_STREAM_BASE: u64 = 1 << 62;
const BOOTSTRAP_RESAMPLES: usize = 200;

/// One sampled path on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridPath {
    pub fn sup_abs(&self) -> f64 {
        sup_abs(&self.values)
    }
}

fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Which limit process to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// `s U(G) + sqrt(1 - s^2) G' V` (plain p-values under shift).
    ShiftFcp,
    /// `s U(G^w) + sqrt(1 - s^2) rho (G^w)' (V(I^w) + (I - I^w) N)`.
    WeightedFcp,
    /// `(Z_0, Z_1, Z)` for plain p-values in novelty detection, with
    /// `Z_0 = s/sqrt(pi0) U(G_0) + sqrt(1 - s^2) G_0' W`,
    /// `Z_1 = s/sqrt(1-pi0) V(G) + sqrt(1 - s^2) G' W`, `Z = pi0 Z_0 + (1-pi0) Z_1`.
    NoveltyTriple,
    /// Weighted analogue of the triple, with `W(I^w) + (I - I^w) N` as the
    /// shared calibration term.
    WeightedNoveltyTriple,
}

impl LimitKind {
    pub fn is_triple(&self) -> bool {
        matches!(
            self,
            LimitKind::NoveltyTriple | LimitKind::WeightedNoveltyTriple
        )
    }
}

/// A sampled limit: one path, or the novelty triple.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitSample {
    Single(GridPath),
    Triple {
        z0: GridPath,
        z1: GridPath,
        z: GridPath,
    },
}

impl LimitSample {
    /// The path whose supremum is reported: the single path, or `Z`.
    pub fn main(&self) -> &GridPath {
        match self {
            LimitSample::Single(p) => p,
            LimitSample::Triple { z, .. } => z,
        }
    }
}

/// `size` equispaced points `k / (size + 1)`, `k = 1..=size`.
pub fn default_grid(size: usize) -> Vec<f64> {
    let d = (size + 1) as f64;
    (1..=size).map(|k| k as f64 / d).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !(*t > 0.0 && *t < 1.0)) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain(
            "grid must be strictly increasing inside (0, 1)".into(),
        ));
    }
    Ok(())
}

/// Bridge values at nondecreasing times in [0, 1], written into `out`.
fn bridge_along(times: &[f64], rng: &mut SeededRng, out: &mut [f64]) {
    let mut w = 0.0;
    let mut prev = 0.0f64;
    for (o, &s) in out.iter_mut().zip(times) {
        let s = s.clamp(prev, 1.0);
        w += (s - prev).sqrt() * rng.standard_normal();
        *o = w;
        prev = s;
    }
    let w1 = w + (1.0 - prev).sqrt() * rng.standard_normal();
    for (o, &s) in out.iter_mut().zip(times) {
        *o -= s.clamp(0.0, 1.0) * w1;
    }
}

/// Standard Brownian bridge on a strictly increasing grid inside (0, 1).
pub fn sample_brownian_bridge(grid: &[f64], rng: &mut SeededRng) -> Result<GridPath> {
    check_grid(grid)?;
    let mut values = vec![0.0; grid.len()];
    bridge_along(grid, rng, &mut values);
    Ok(GridPath {
        grid: grid.to_vec(),
        values,
    })
}

/// Theory curves tabulated on a grid, ready to assemble many paths.
///
/// Every variant is written as
/// `first(k) = a U(tu[k]) + c[k] M[k]`, `second(k) = a1 V(tv[k]) + c1[k] M[k]`
/// with the shared term `M[k] = W(tm[k]) + (grid[k] - tm[k]) N`.
#[derive(Debug, Clone)]
pub struct LimitPlan {
    kind: LimitKind,
    grid: Vec<f64>,
    pi0: f64,
    a: f64,
    tu: Vec<f64>,
    c: Vec<f64>,
    a1: f64,
    tv: Vec<f64>,
    c1: Vec<f64>,
    tm: Vec<f64>,
}

impl LimitPlan {
    pub fn new(
        kind: LimitKind,
        theory: &TheoryFunctions,
        sigma2: f64,
        grid: &[f64],
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&sigma2) {
            return Err(Error::Domain(format!(
                "sigma2 = {sigma2} must lie in [0, 1]"
            )));
        }
        check_grid(grid)?;
        let s = sigma2.sqrt();
        let r = (1.0 - sigma2).sqrt();
        let rho = theory.rho_w();
        let map = |f: &dyn Fn(f64) -> f64| grid.iter().map(|&t| f(t)).collect::<Vec<_>>();
        let try_map =
            |f: &dyn Fn(f64) -> Result<f64>| grid.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>();
        let plan = match kind {
            LimitKind::ShiftFcp => Self {
                kind,
                grid: grid.to_vec(),
                pi0: 1.0,
                a: s,
                tu: map(&|t| theory.g(t)),
                // V(t) = W(t) - t W(1) with N unused: M = V
                c: map(&|t| r * theory.g_prime(t)),
                a1: 0.0,
                tv: Vec::new(),
                c1: Vec::new(),
                tm: grid.to_vec(),
            },
            LimitKind::WeightedFcp => Self {
                kind,
                grid: grid.to_vec(),
                pi0: 1.0,
                a: s,
                tu: map(&|t| theory.gw(t)),
                c: map(&|t| r * rho * theory.gw_prime(t)),
                a1: 0.0,
                tv: Vec::new(),
                c1: Vec::new(),
                tm: map(&|t| theory.iw(t)),
            },
            LimitKind::NoveltyTriple => {
                let pi0 = theory.pi0()?;
                Self {
                    kind,
                    grid: grid.to_vec(),
                    pi0,
                    a: s / pi0.sqrt(),
                    tu: try_map(&|t| theory.g0(t))?,
                    c: try_map(&|t| Ok(r * theory.g0_prime(t)?))?,
                    a1: s / (1.0 - pi0).sqrt(),
                    tv: map(&|t| theory.g(t)),
                    c1: map(&|t| r * theory.g_prime(t)),
                    tm: grid.to_vec(),
                }
            }
            LimitKind::WeightedNoveltyTriple => {
                let pi0 = theory.pi0()?;
                Self {
                    kind,
                    grid: grid.to_vec(),
                    pi0,
                    a: s / pi0.sqrt(),
                    tu: try_map(&|t| theory.g0w(t))?,
                    c: try_map(&|t| Ok(r * rho * theory.g0w_prime(t)?))?,
                    a1: s / (1.0 - pi0).sqrt(),
                    tv: map(&|t| theory.gw(t)),
                    c1: map(&|t| r * rho * theory.gw_prime(t)),
                    tm: map(&|t| theory.iw(t)),
                }
            }
        };
        Ok(plan)
    }

    pub fn kind(&self) -> LimitKind {
        self.kind
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn sample(&self, rng: &mut SeededRng) -> LimitSample {
        let k = self.grid.len();
        let mut u = vec![0.0; k];
        let mut shared = vec![0.0; k];
        bridge_along(&self.tu, rng, &mut u);
        bridge_along(&self.tm, rng, &mut shared);
        let n = rng.standard_normal();
        for ((m, &t), &tm) in shared.iter_mut().zip(&self.grid).zip(&self.tm) {
            *m += (t - tm) * n;
        }
        let first: Vec<f64> = (0..k)
            .map(|i| self.a * u[i] + self.c[i] * shared[i])
            .collect();
        if !self.kind.is_triple() {
            return LimitSample::Single(GridPath {
                grid: self.grid.clone(),
                values: first,
            });
        }
        let mut v = vec![0.0; k];
        bridge_along(&self.tv, rng, &mut v);
        let second: Vec<f64> = (0..k)
            .map(|i| self.a1 * v[i] + self.c1[i] * shared[i])
            .collect();
        let mix: Vec<f64> = first
            .iter()
            .zip(&second)
            .map(|(z0, z1)| self.pi0 * z0 + (1.0 - self.pi0) * z1)
            .collect();
        let path = |values| GridPath {
            grid: self.grid.clone(),
            values,
        };
        LimitSample::Triple {
            z0: path(first),
            z1: path(second),
            z: path(mix),
        }
    }
}

/// One draw of the limit process `kind`.
pub fn sample_limit_process(
    kind: LimitKind,
    theory: &TheoryFunctions,
    sigma2: f64,
    grid: &[f64],
    rng: &mut SeededRng,
) -> Result<LimitSample> {
    Ok(LimitPlan::new(kind, theory, sigma2, grid)?.sample(rng))
}

/// Monte Carlo quantile of the supremum of a limit process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupQuantile {
    pub kind: LimitKind,
    pub delta: f64,
    pub reps: usize,
    pub grid_size: usize,
    pub quantile: f64,
    pub bootstrap_se: f64,
    pub seed: u64,
}

/// Empirical `(1 - delta)`-quantile of `sup_t |path(t)|` over the default
/// grid of `grid_size` points, from `reps` paths. Path `r` uses stream `r`
/// of the master seed carried by `rng`.
pub fn limit_sup_quantile(
    kind: LimitKind,
    theory: &TheoryFunctions,
    sigma2: f64,
    delta: f64,
    reps: usize,
    grid_size: usize,
    rng: &SeededRng,
) -> Result<SupQuantile> {
    check_probability_open("delta", delta)?;
    if reps < 100 || grid_size < 64 {
        return Err(Error::Domain(format!(
            "need reps >= 100 and grid_size >= 64, got reps={reps}, grid_size={grid_size}"
        )));
    }
    let seed = rng.master_seed();
    let plan = LimitPlan::new(kind, theory, sigma2, &default_grid(grid_size))?;
    let sups: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| plan.sample(&mut SeededRng::new(seed, r)).main().sup_abs())
        .collect();
    let quantile = empirical_quantile(&sups, 1.0 - delta)?;
    let bootstrap_se = bootstrap_quantile_se(&sups, 1.0 - delta, seed)?;
    Ok(SupQuantile {
        kind,
        delta,
        reps,
        grid_size,
        quantile,
        bootstrap_se,
        seed,
    })
}

/// Standard deviation of the `p`-quantile over 200 bootstrap resamples.
pub fn bootstrap_quantile_se(samples: &[f64], p: f64, seed: u64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("bootstrap of an empty sample".into()));
    }
    let n = samples.len();
    let qs = (0..BOOTSTRAP_RESAMPLES as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = SeededRng::new(seed, BOOTSTRAP_STREAM_BASE + b);
            let resample: Vec<f64> = (0..n).map(|_| samples[rng.index(n)]).collect();
            empirical_quantile(&resample, p)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = qs.iter().sum::<f64>() / qs.len() as f64;
    let var = qs.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (qs.len() - 1) as f64;
    Ok(var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use crate::limits::ScenarioSpec;

    fn exchangeable() -> TheoryFunctions {
        let e = DistributionSpec::exponential(1.0).unwrap();
        TheoryFunctions::new(&ScenarioSpec::prediction(e, e)).unwrap()
    }

    #[test]
    fn bridge_rejects_bad_grids() {
        let mut rng = SeededRng::new(1, 0);
        assert!(sample_brownian_bridge(&[0.5, 0.2], &mut rng).is_err());
        assert!(sample_brownian_bridge(&[0.0, 0.5], &mut rng).is_err());
        assert!(sample_brownian_bridge(&[0.5, 1.0], &mut rng).is_err());
    }

    #[test]
    fn bridge_is_deterministic_per_stream() {
        let grid = default_grid(16);
        let a = sample_brownian_bridge(&grid, &mut SeededRng::new(5, 3)).unwrap();
        let b = sample_brownian_bridge(&grid, &mut SeededRng::new(5, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn triple_mixture_is_exact() {
        let e = DistributionSpec::exponential(1.0).unwrap();
        let s = ScenarioSpec::novelty(e, e, DistributionSpec::exponential(0.5).unwrap(), 0.7);
        let th = TheoryFunctions::new(&s).unwrap();
        let grid = default_grid(50);
        let sample = sample_limit_process(
            LimitKind::NoveltyTriple,
            &th,
            0.4,
            &grid,
            &mut SeededRng::new(2, 2),
        )
        .unwrap();
        let LimitSample::Triple { z0, z1, z } = sample else {
            panic!("expected a triple")
        };
        for i in 0..grid.len() {
            assert_eq!(z.values[i], 0.7 * z0.values[i] + (1.0 - 0.7) * z1.values[i]);
        }
    }

    #[test]
    fn missing_novelty_curves_are_configuration_errors() {
        let th = exchangeable();
        let r = LimitPlan::new(LimitKind::NoveltyTriple, &th, 0.5, &default_grid(8));
        assert!(matches!(r, Err(Error::Configuration(_))));
    }

    #[test]
    fn sup_quantile_is_monotone_in_delta() {
        let th = exchangeable();
        let rng = SeededRng::new(9, 0);
        let q50 = limit_sup_quantile(LimitKind::ShiftFcp, &th, 0.5, 0.5, 2000, 128, &rng).unwrap();
        let q05 = limit_sup_quantile(LimitKind::ShiftFcp, &th, 0.5, 0.05, 2000, 128, &rng).unwrap();
        assert!(q50.quantile < q05.quantile);
        assert!(q05.bootstrap_se > 0.0);
    }
}
