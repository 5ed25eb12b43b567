//! End-to-end gap-vs-error experiments: target generation, Poisson count
//! sampling, seeded sweeps over swap/shuffle schedules, regression, and
//! CSV/SVG emission. The whole sweep is a pure function of the master seed:
//! per-point and per-trial seeds are derived by counter-based mixing keyed
//! on the schedule *values*, so extending a schedule never perturbs
//! existing trials.

pub mod regression;
pub mod svg;

use std::fmt;
use std::time::Instant;

use rand::prelude::*;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use regression::{fit_line_xy, LineFit};

use crate::error::{Error, Result};
use crate::graph::{base_graph, second_eigenvalue, switch_chain};
use crate::mask::{
    estimate_lambda2, grid_mask, lift_graph, shuffle_mask, Lambda2Params, SamplingMask,
};
use crate::seed;
use crate::solvers::{
    solve_maxqnorm, solve_poisson, solve_ridge, solve_ridge_projected, SolverConfig, SolverResult,
};
use crate::tensor::{CpFactors, DenseTensor, Mat};

/// Completion algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Ridge,
    RidgeProj,
    Maxq,
    Poisson,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::Ridge => "ridge",
            Algorithm::RidgeProj => "ridge-proj",
            Algorithm::Maxq => "maxq",
            Algorithm::Poisson => "poisson",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ridge" => Ok(Algorithm::Ridge),
            "ridge-proj" => Ok(Algorithm::RidgeProj),
            "maxq" => Ok(Algorithm::Maxq),
            "poisson" => Ok(Algorithm::Poisson),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm `{other}`"
            ))),
        }
    }
}

/// Target-tensor normalization mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Normalization {
    /// Rescale so ‖T‖_F = √(n^t).
    FrobeniusSqrtNt,
    /// Affine rescale so entries span exactly [lo, hi].
    Range { lo: f64, hi: f64 },
}

/// How masks are produced across the sweep; both variants keep |E| fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaskScheme {
    /// Lift a d-regular base graph after the scheduled number of accepted
    /// switch-chain swaps.
    GraphLift { d: usize, swaps: Vec<u64> },
    /// Grid mask at the given fraction with the scheduled shuffle fractions.
    GridShuffle { fraction: f64, shuffles: Vec<f64> },
}

/// Full experiment description; deserializable from the JSON config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub n: usize,
    pub t: usize,
    pub r: usize,
    /// Defaults to 10·r.
    #[serde(default)]
    pub r_fit: Option<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub normalization: Normalization,
    pub scheme: MaskScheme,
    /// Secondary regression drops records with gap above this value.
    #[serde(default)]
    pub lambda2_cutoff: Option<f64>,
    /// Poisson box [β, α]; defaults to the range normalization bounds, or
    /// [1, 6] otherwise.
    #[serde(default)]
    pub poisson_range: Option<[f64; 2]>,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    #[serde(default = "default_gap_restarts")]
    pub gap_restarts: usize,
    #[serde(default = "default_gap_sweeps")]
    pub gap_sweeps: usize,
}

fn default_trials() -> usize {
    5
}
fn default_max_sweeps() -> usize {
    100
}
fn default_inner_tol() -> f64 {
    1e-8
}
fn default_gap_restarts() -> usize {
    8
}
fn default_gap_sweeps() -> usize {
    200
}

impl ExperimentConfig {
    pub fn r_fit(&self) -> usize {
        self.r_fit.unwrap_or(10 * self.r.max(1))
    }

    pub fn poisson_box(&self) -> [f64; 2] {
        if let Some(b) = self.poisson_range {
            return b;
        }
        match self.normalization {
            Normalization::Range { lo, hi } => [lo, hi],
            Normalization::FrobeniusSqrtNt => [1.0, 6.0],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t < 2 {
            return Err(Error::InvalidArgument(
                "experiment needs order t ≥ 2".into(),
            ));
        }
        if self.n < 2 || self.r == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument(
                "experiment needs n ≥ 2, r ≥ 1, trials ≥ 1".into(),
            ));
        }
        match &self.scheme {
            MaskScheme::GraphLift { swaps, .. } if swaps.is_empty() => {
                Err(Error::InvalidArgument("swap schedule is empty".into()))
            }
            MaskScheme::GridShuffle { shuffles, .. } if shuffles.is_empty() => {
                Err(Error::InvalidArgument("shuffle schedule is empty".into()))
            }
            _ => Ok(()),
        }
    }
}

/// One (gap, error) observation.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub t: usize,
    pub r: usize,
    pub r_fit: usize,
    /// Graph degree d for lifted sweeps, grid fraction for shuffle sweeps.
    pub d_or_fraction: f64,
    /// Schedule point: accepted swaps or shuffle fraction.
    pub swaps_or_shuffle: f64,
    /// Per-trial derived seed.
    pub seed: u64,
    /// Gap statistic: λ(G) for lifted masks, the λ₂(H) estimate otherwise.
    pub lambda2: f64,
    /// ‖T̂−T‖_F / ‖T‖_F (equals ‖T̂−T‖_F / √(n^t) under the Frobenius
    /// normalization).
    pub rel_error: f64,
    /// ‖T̂−T‖_F² / n^t.
    pub mse: f64,
    pub wall_ms: u64,
    pub converged: bool,
    /// Number of revealed entries, constant across a sweep.
    pub e_count: usize,
}

/// A trial that failed, kept without aborting the sweep.
#[derive(Debug, Clone)]
pub struct TrialFailure {
    pub point: f64,
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
}

/// Applies a normalization mode in place. Range normalization rejects
/// constant tensors (nothing to stretch); the Frobenius mode rejects the
/// zero tensor.
pub fn normalize_target(dense: &mut DenseTensor, normalization: Normalization) -> Result<()> {
    match normalization {
        Normalization::FrobeniusSqrtNt => {
            let norm = dense.frobenius_norm();
            if norm <= 1e-300 {
                return Err(Error::InvalidArgument("degenerate zero target".into()));
            }
            let scale = (dense.len() as f64).sqrt() / norm;
            for v in dense.values_mut() {
                *v *= scale;
            }
        }
        Normalization::Range { lo, hi } => {
            if hi <= lo {
                return Err(Error::InvalidArgument(format!(
                    "range normalization needs lo < hi, got [{lo}, {hi}]"
                )));
            }
            let max = dense
                .values()
                .iter()
                .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let min = dense.values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
            if max - min <= 1e-300 {
                return Err(Error::InvalidArgument(
                    "range normalization rejected: target is constant".into(),
                ));
            }
            let scale = (hi - lo) / (max - min);
            for v in dense.values_mut() {
                *v = lo + (*v - min) * scale;
            }
        }
    }
    Ok(())
}

/// Random rank-r CP target from U[0,1] factors, normalized as requested.
/// Deterministic under the seed.
pub fn gen_target(
    n: usize,
    t: usize,
    r: usize,
    normalization: Normalization,
    seed: u64,
) -> Result<DenseTensor> {
    if r == 0 {
        return Err(Error::InvalidArgument("target rank must be ≥ 1".into()));
    }
    if t < 2 {
        return Err(Error::InvalidArgument("target order must be ≥ 2".into()));
    }
    let mut rng = seed::rng_from(&[seed, 0x7461_7267]);
    let factors: Vec<Mat> = (0..t)
        .map(|_| {
            let data: Vec<f64> = (0..n * r).map(|_| rng.random::<f64>()).collect();
            Mat::new(n, r, data).expect("shape matches")
        })
        .collect();
    let mut dense = CpFactors::new(factors)?.to_dense()?;
    normalize_target(&mut dense, normalization)?;
    Ok(dense)
}

/// Independent Poisson draws `X_e ~ Poisson(T_e)` at the observed entries,
/// zeros elsewhere; deterministic under the seed.
pub fn sample_poisson_counts(
    t: &DenseTensor,
    mask: &SamplingMask,
    seed: u64,
) -> Result<DenseTensor> {
    if t.dims() != mask.dims() {
        return Err(Error::DimMismatch(format!(
            "target dims {:?} vs mask dims {:?}",
            t.dims(),
            mask.dims()
        )));
    }
    let mut rng = seed::rng_from(&[seed, 0x706f_6973]);
    let mut counts = DenseTensor::zeros(t.dims().to_vec())?;
    for lin in mask.linear_indices() {
        let mean = t.values()[lin];
        if mean < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "negative Poisson mean {mean} at observed entry"
            )));
        }
        let draw = if mean == 0.0 {
            0.0
        } else {
            let dist = Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?;
            dist.sample(&mut rng)
        };
        counts.values_mut()[lin] = draw;
    }
    Ok(counts)
}

struct TrialOutcome {
    lambda2: f64,
    result: SolverResult,
}

fn run_trial(
    cfg: &ExperimentConfig,
    base: Option<&crate::graph::RegularGraph>,
    grid: Option<&SamplingMask>,
    point: f64,
    trial_seed: u64,
) -> Result<(TrialOutcome, DenseTensor, usize)> {
    let (mask, gap) = match &cfg.scheme {
        MaskScheme::GraphLift { .. } => {
            let base = base.expect("lift scheme carries a base graph");
            let g = switch_chain(base, point as u64, seed::mix(&[trial_seed, 0x6368_6169]));
            let lambda = second_eigenvalue(&g)?;
            (lift_graph(&g, cfg.t)?, lambda)
        }
        MaskScheme::GridShuffle { .. } => {
            let grid = grid.expect("shuffle scheme carries a grid mask");
            let mask = shuffle_mask(grid, point, seed::mix(&[trial_seed, 0x7368_7566]))?;
            let params = Lambda2Params {
                restarts: cfg.gap_restarts,
                sweeps: cfg.gap_sweeps,
                seed: seed::mix(&[trial_seed, 0x0067_6170]),
            };
            let gap = estimate_lambda2(&mask, params);
            (mask, gap)
        }
    };

    let target = gen_target(
        cfg.n,
        cfg.t,
        cfg.r,
        cfg.normalization,
        seed::mix(&[trial_seed, 0x0074_6774]),
    )?;

    let [beta, alpha] = cfg.poisson_box();
    let solver_cfg = SolverConfig {
        fit_rank: cfg.r_fit(),
        max_sweeps: cfg.max_sweeps,
        inner_tol: cfg.inner_tol,
        poisson_lower: beta,
        poisson_upper: alpha,
        seed: seed::mix(&[trial_seed, 0x736f_6c76]),
        ..Default::default()
    };

    let result = match cfg.algorithm {
        Algorithm::Ridge => solve_ridge(&target, &mask, &solver_cfg)?,
        Algorithm::RidgeProj => solve_ridge_projected(&target, &mask, &solver_cfg)?,
        Algorithm::Maxq => solve_maxqnorm(&target, &mask, &solver_cfg)?,
        Algorithm::Poisson => {
            let counts =
                sample_poisson_counts(&target, &mask, seed::mix(&[trial_seed, 0x636e_7473]))?;
            solve_poisson(&counts, &mask, &solver_cfg)?
        }
    };
    let e_count = mask.len();
    Ok((
        TrialOutcome {
            lambda2: gap,
            result,
        },
        target,
        e_count,
    ))
}

/// Runs the full sweep: every schedule point × trial builds its mask,
/// estimates the gap, generates a target (and counts for Poisson), solves,
/// and records (gap, error). |E| is identical across all records; failures
/// are collected without aborting. Trials run in parallel; output order is
/// deterministic.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let (base, grid, points, d_or_fraction) = match &cfg.scheme {
        MaskScheme::GraphLift { d, swaps } => {
            let base = base_graph(cfg.n, *d)?;
            let points: Vec<f64> = swaps.iter().map(|&s| s as f64).collect();
            (Some(base), None, points, *d as f64)
        }
        MaskScheme::GridShuffle { fraction, shuffles } => {
            let dims = vec![cfg.n; cfg.t];
            let grid = grid_mask(&dims, *fraction)?;
            (None, Some(grid), shuffles.clone(), *fraction)
        }
    };

    let jobs: Vec<(usize, f64, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(pi, &p)| (0..cfg.trials).map(move |trial| (pi, p, trial)))
        .collect();

    let outcomes: Vec<(usize, usize, std::result::Result<TrialRecord, TrialFailure>)> = jobs
        .par_iter()
        .map(|&(pi, point, trial)| {
            let trial_seed = seed::mix(&[cfg.master_seed, point.to_bits(), trial as u64]);
            let started = Instant::now();
            let res = run_trial(cfg, base.as_ref(), grid.as_ref(), point, trial_seed);
            let wall_ms = started.elapsed().as_millis() as u64;
            let rec = match res {
                Ok((outcome, target, e_count)) => {
                    let diff_sq: f64 = outcome
                        .result
                        .estimate
                        .values()
                        .iter()
                        .zip(target.values())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    let err_f = diff_sq.sqrt();
                    let rel_error = err_f / target.frobenius_norm();
                    let mse = diff_sq / target.len() as f64;
                    Ok(TrialRecord {
                        algorithm: cfg.algorithm,
                        n: cfg.n,
                        t: cfg.t,
                        r: cfg.r,
                        r_fit: cfg.r_fit(),
                        d_or_fraction,
                        swaps_or_shuffle: point,
                        seed: trial_seed,
                        lambda2: outcome.lambda2,
                        rel_error,
                        mse,
                        wall_ms,
                        converged: outcome.result.converged,
                        e_count,
                    })
                }
                Err(e) => Err(TrialFailure {
                    point,
                    trial,
                    message: e.to_string(),
                }),
            };
            (pi, trial, rec)
        })
        .collect();

    let mut sorted = outcomes;
    sorted.sort_by_key(|(pi, trial, _)| (*pi, *trial));
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (_, _, rec) in sorted {
        match rec {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    if let Some(first) = records.first() {
        debug_assert!(records.iter().all(|r| r.e_count == first.e_count));
    }
    Ok(SweepOutput { records, failures })
}

/// CSV schema shared by the CLI and the test suites. `wall_ms` is wall
/// clock and the only field not reproduced bit-for-bit across reruns.
pub const CSV_HEADER: &str =
    "algorithm,n,t,r,r_fit,d_or_fraction,swaps_or_shuffle,seed,lambda2,rel_error,mse,wall_ms,converged";

pub fn to_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.algorithm,
            r.n,
            r.t,
            r.r,
            r.r_fit,
            r.d_or_fraction,
            r.swaps_or_shuffle,
            r.seed,
            r.lambda2,
            r.rel_error,
            r.mse,
            r.wall_ms,
            r.converged
        ));
    }
    s
}

/// Drops the wall-clock column so reruns can be compared byte-for-byte.
pub fn csv_without_wall_ms(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            let kept: Vec<&str> = fields
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != 11)
                .map(|(_, f)| *f)
                .collect();
            kept.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// The (gap, error) pairs a regression consumes: relative error for the
/// square-loss algorithms, MSE for Poisson.
pub fn regression_points(records: &[TrialRecord]) -> Vec<(f64, f64)> {
    records
        .iter()
        .map(|r| {
            let y = if r.algorithm == Algorithm::Poisson {
                r.mse
            } else {
                r.rel_error
            };
            (r.lambda2, y)
        })
        .collect()
}

/// Full and cutoff regressions of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    pub full: LineFit,
    pub cutoff_value: Option<f64>,
    pub cutoff: Option<LineFit>,
}

pub fn regression_report(records: &[TrialRecord], cutoff: Option<f64>) -> Result<RegressionReport> {
    let points = regression_points(records);
    let full = fit_line_xy(&points, None)?;
    let cut = match cutoff {
        Some(c) => Some(fit_line_xy(&points, Some(c))?),
        None => None,
    };
    Ok(RegressionReport {
        full,
        cutoff_value: cutoff,
        cutoff: cut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn target_frobenius_normalization() {
        let t = gen_target(6, 3, 2, Normalization::FrobeniusSqrtNt, 3).unwrap();
        let expect = (6f64.powi(3)).sqrt();
        assert_abs_diff_eq!(t.frobenius_norm(), expect, epsilon = 1e-9);
    }

    #[test]
    fn target_range_normalization() {
        let t = gen_target(5, 3, 2, Normalization::Range { lo: 1.0, hi: 6.0 }, 4).unwrap();
        let max = t.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let min = t.values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
        assert_abs_diff_eq!(min, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(max, 6.0, epsilon = 1e-9);
    }

    #[test]
    fn constant_target_rejected_by_range_normalization() {
        // a rank-1 tensor from constant factors is constant: nothing to
        // stretch onto [1, 6]
        let f = Mat::new(3, 1, vec![0.5; 3]).unwrap();
        let mut constant = CpFactors::new(vec![f.clone(), f.clone(), f])
            .unwrap()
            .to_dense()
            .unwrap();
        let err = normalize_target(&mut constant, Normalization::Range { lo: 1.0, hi: 6.0 });
        assert!(err.is_err());
        assert!(normalize_target(&mut constant, Normalization::FrobeniusSqrtNt).is_ok());
    }

    #[test]
    fn poisson_counts_reject_negative_means() {
        let dims = vec![3, 3];
        let t = DenseTensor::new(dims.clone(), vec![-0.5; 9]).unwrap();
        let mask = grid_mask(&dims, 1.0).unwrap();
        assert!(sample_poisson_counts(&t, &mask, 1).is_err());
    }

    #[test]
    fn target_deterministic_and_seed_sensitive() {
        let a = gen_target(4, 3, 2, Normalization::FrobeniusSqrtNt, 9).unwrap();
        let b = gen_target(4, 3, 2, Normalization::FrobeniusSqrtNt, 9).unwrap();
        let c = gen_target(4, 3, 2, Normalization::FrobeniusSqrtNt, 10).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn poisson_counts_zero_mean_and_determinism() {
        let dims = vec![4, 4];
        let zero = DenseTensor::zeros(dims.clone()).unwrap();
        let mask = grid_mask(&dims, 1.0).unwrap();
        let counts = sample_poisson_counts(&zero, &mask, 1).unwrap();
        assert!(counts.values().iter().all(|&v| v == 0.0));

        let t = DenseTensor::new(dims, vec![3.0; 16]).unwrap();
        let a = sample_poisson_counts(&t, &mask, 2).unwrap();
        let b = sample_poisson_counts(&t, &mask, 2).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(a.values().iter().all(|v| v.fract() == 0.0 && *v >= 0.0));
    }

    #[test]
    fn poisson_counts_moments() {
        // mean 3, 10^5 draws: sample mean within 3σ/√N, variance within 5%
        let n = 100_000usize;
        let dims = vec![n, 2];
        let mut t = DenseTensor::zeros(dims.clone()).unwrap();
        for i in 0..n {
            t.set(&[i, 0], 3.0);
        }
        let tuples: Vec<Vec<usize>> = (0..n).map(|i| vec![i, 0]).collect();
        let mask = SamplingMask::new(dims, tuples).unwrap();
        let counts = sample_poisson_counts(&t, &mask, 12).unwrap();
        let draws: Vec<f64> = mask
            .linear_indices()
            .iter()
            .map(|&l| counts.values()[l])
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let sigma = 3f64.sqrt();
        assert!(
            (mean - 3.0).abs() <= 3.0 * sigma / (n as f64).sqrt(),
            "mean {mean}"
        );
        assert!((var - 3.0).abs() <= 0.05 * 3.0, "variance {var}");
    }

    #[test]
    fn sweep_single_point_is_deterministic() {
        let cfg = ExperimentConfig {
            algorithm: Algorithm::Ridge,
            n: 8,
            t: 3,
            r: 2,
            r_fit: Some(4),
            trials: 2,
            master_seed: 5,
            normalization: Normalization::FrobeniusSqrtNt,
            scheme: MaskScheme::GraphLift {
                d: 4,
                swaps: vec![0, 20],
            },
            lambda2_cutoff: None,
            poisson_range: None,
            max_sweeps: 10,
            inner_tol: 1e-8,
            gap_restarts: 4,
            gap_sweeps: 50,
        };
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert!(a.failures.is_empty());
        assert_eq!(a.records.len(), 4);
        assert_eq!(
            csv_without_wall_ms(&to_csv(&a.records)),
            csv_without_wall_ms(&to_csv(&b.records))
        );
        // |E| constant across the sweep
        let e0 = a.records[0].e_count;
        assert!(a.records.iter().all(|r| r.e_count == e0));
        // zero-swap point keeps the base construction's gap
        let base = base_graph(8, 4).unwrap();
        let lam0 = second_eigenvalue(&base).unwrap();
        assert_abs_diff_eq!(a.records[0].lambda2, lam0, epsilon = 1e-9);
    }

    #[test]
    fn csv_header_and_shape() {
        let rec = TrialRecord {
            algorithm: Algorithm::Maxq,
            n: 4,
            t: 3,
            r: 1,
            r_fit: 10,
            d_or_fraction: 4.0,
            swaps_or_shuffle: 0.0,
            seed: 1,
            lambda2: 2.5,
            rel_error: 0.25,
            mse: 0.01,
            wall_ms: 12,
            converged: true,
            e_count: 64,
        };
        let csv = to_csv(&[rec]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("maxq,4,3,1,10,4,0,"));
        let trimmed = csv_without_wall_ms(&csv);
        assert!(!trimmed.lines().next().unwrap().contains("wall_ms"));
    }
}
