//! Ridge ALS and its projected variant.
//!
//! Ridge minimizes `‖P(T′−T)‖_F² + ε Σ_i ‖U^{(i)}‖_F²` by exact block
//! coordinate descent: each factor update is a mask-restricted regularized
//! least-squares solve (conjugate gradient on the per-row normal
//! equations). The projected variant minimizes
//! `Σ_i ‖U^{(i)}‖_F² + (κ/2)‖P(T′−T−R)‖_F² + β‖R‖_F²` subject to
//! `‖R‖_F ≤ δ`, alternating factor updates against the shifted target
//! `T + R` with the closed-form slack update rescaled onto the δ-ball.

use crate::error::Result;
use crate::mask::SamplingMask;
use crate::tensor::{CpFactors, DenseTensor, Mat};

use super::cg;
use super::{
    init_factors, row_normal_equations, warn_if_overparameterized, MaskedProblem, SolverConfig,
    SolverResult,
};

const CG_CAP: usize = 500;

/// One full pass of exact per-factor least-squares updates:
/// each row of each factor solves `(fit_w·G + reg_w·I) u = fit_w·rhs`.
pub(super) fn ls_sweep(
    factors: &mut [Mat],
    prob: &MaskedProblem,
    target: &[f64],
    fit_w: f64,
    reg_w: f64,
    inner_tol: f64,
) {
    let t = factors.len();
    let r = factors[0].cols();
    let mut gram = vec![0.0; r * r];
    let mut rhs = vec![0.0; r];
    let mut wbuf = vec![0.0; r];
    for mode in 0..t {
        for row in 0..factors[mode].rows() {
            row_normal_equations(
                prob, factors, mode, row, target, &mut gram, &mut rhs, &mut wbuf,
            );
            let mut b = vec![0.0; r];
            for l in 0..r {
                b[l] = fit_w * rhs[l];
            }
            let gram_ref = &gram;
            let apply = |v: &[f64], out: &mut [f64]| {
                for a in 0..r {
                    let mut s = 0.0;
                    let ga = &gram_ref[a * r..a * r + r];
                    for b2 in 0..r {
                        s += ga[b2] * v[b2];
                    }
                    out[a] = fit_w * s + reg_w * v[a];
                }
            };
            let x = factors[mode].row_mut(row);
            cg::solve_spd(apply, &b, x, inner_tol, CG_CAP);
        }
    }
}

fn frob_sq_factors(factors: &[Mat]) -> f64 {
    factors.iter().map(|f| f.frobenius_sq()).sum()
}

/// Ridge-penalized alternating least squares on the observed entries.
pub fn solve_ridge(
    observed: &DenseTensor,
    mask: &SamplingMask,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    cfg.validate()?;
    let prob = MaskedProblem::new(observed, mask)?;
    let mut warnings = Vec::new();
    warn_if_overparameterized(cfg, mask.dims(), &mut warnings);

    let mut factors = init_factors(mask.dims(), cfg, &prob, false);
    let eps = cfg.ridge_weight;
    let mut trace: Vec<f64> = Vec::with_capacity(cfg.max_sweeps);
    let mut converged = false;
    let mut sweeps_used = 0;
    for sweep in 0..cfg.max_sweeps {
        ls_sweep(&mut factors, &prob, &prob.y, 1.0, eps, cfg.inner_tol);
        let est = prob.eval(&factors);
        let fit: f64 = est
            .iter()
            .zip(&prob.y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let obj = fit + eps * frob_sq_factors(&factors);
        sweeps_used = sweep + 1;
        if let Some(&prev) = trace.last() {
            if (prev - obj).abs() <= cfg.inner_tol * prev.abs().max(1.0) {
                trace.push(obj);
                converged = true;
                break;
            }
        }
        trace.push(obj);
    }

    let factors = CpFactors::new(factors)?;
    let estimate = factors.to_dense()?;
    Ok(SolverResult {
        factors,
        estimate,
        objective_trace: trace,
        sweeps_used,
        converged,
        warnings,
        clamp_likelihood_gap: None,
        slack_norm: None,
    })
}

/// Shared driver for the projected solvers: factor sweeps against the
/// shifted target `y + R`, then the closed-form slack update projected onto
/// the δ-ball. The `update_factors` hook performs one full factor pass.
pub(super) fn projected_loop<F>(
    prob: &MaskedProblem,
    cfg: &SolverConfig,
    delta: f64,
    factors: &mut Vec<Mat>,
    mut update_factors: F,
    mut objective: impl FnMut(&[Mat], &[f64], &[f64]) -> f64,
) -> (Vec<f64>, usize, bool, Vec<f64>)
where
    F: FnMut(&mut Vec<Mat>, &MaskedProblem, &[f64]),
{
    let kappa = cfg.coupling;
    let beta = cfg.slack_weight;
    let m = prob.observations();
    let mut slack = vec![0.0; m];
    let mut target = prob.y.clone();
    let mut trace: Vec<f64> = Vec::with_capacity(cfg.max_sweeps);
    let mut converged = false;
    let mut sweeps_used = 0;
    for sweep in 0..cfg.max_sweeps {
        for (tv, (yv, rv)) in target.iter_mut().zip(prob.y.iter().zip(&slack)) {
            *tv = yv + rv;
        }
        update_factors(factors, prob, &target);

        // slack: unconstrained minimizer R = κ/(κ+2β)·(T′−T) on E, then
        // rescale onto the ball when it violates ‖R‖_F ≤ δ
        let est = prob.eval(factors);
        let shrink = kappa / (kappa + 2.0 * beta);
        let mut norm_sq = 0.0;
        for (rv, (ev, yv)) in slack.iter_mut().zip(est.iter().zip(&prob.y)) {
            *rv = shrink * (ev - yv);
            norm_sq += *rv * *rv;
        }
        let norm = norm_sq.sqrt();
        if norm > delta {
            let scale = if norm > 0.0 { delta / norm } else { 0.0 };
            for rv in &mut slack {
                *rv *= scale;
            }
        }

        let obj = objective(factors, &est, &slack);
        sweeps_used = sweep + 1;
        if let Some(&prev) = trace.last() {
            if (prev - obj).abs() <= cfg.inner_tol * prev.abs().max(1.0) {
                trace.push(obj);
                converged = true;
                break;
            }
        }
        trace.push(obj);
    }
    (trace, sweeps_used, converged, slack)
}

/// Projected ridge: factor-norm objective with a hard Frobenius ball on the
/// residual slack.
pub fn solve_ridge_projected(
    observed: &DenseTensor,
    mask: &SamplingMask,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    cfg.validate()?;
    let prob = MaskedProblem::new(observed, mask)?;
    let mut warnings = Vec::new();
    warn_if_overparameterized(cfg, mask.dims(), &mut warnings);
    let delta = cfg.resolved_radius(mask);
    let kappa = cfg.coupling;
    let beta = cfg.slack_weight;

    let mut factors = init_factors(mask.dims(), cfg, &prob, false);
    let inner_tol = cfg.inner_tol;
    let (trace, sweeps_used, converged, slack) = projected_loop(
        &prob,
        cfg,
        delta,
        &mut factors,
        |f, p, target| ls_sweep(f, p, target, kappa, 2.0, inner_tol),
        |f, est, slack| {
            let fit: f64 = est
                .iter()
                .zip(&prob.y)
                .zip(slack)
                .map(|((e, y), r)| {
                    let d = e - y - r;
                    d * d
                })
                .sum();
            let slack_sq: f64 = slack.iter().map(|r| r * r).sum();
            frob_sq_factors(f) + 0.5 * kappa * fit + beta * slack_sq
        },
    );
    let slack_norm = slack.iter().map(|r| r * r).sum::<f64>().sqrt();
    debug_assert!(slack_norm <= delta + 1e-9);

    let factors = CpFactors::new(factors)?;
    let estimate = factors.to_dense()?;
    Ok(SolverResult {
        factors,
        estimate,
        objective_trace: trace,
        sweeps_used,
        converged,
        warnings,
        clamp_likelihood_gap: None,
        slack_norm: Some(slack_norm),
    })
}
