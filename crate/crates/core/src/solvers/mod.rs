//! The four practical completion estimators: ridge ALS, projected ridge,
//! max-quasinorm, and Poisson maximum likelihood. All of them fit rank-r_fit
//! CP factors against the entries a mask reveals; they differ in the
//! regularizer and loss.

mod cg;
mod maxq;
mod poisson;
mod ridge;

pub use maxq::solve_maxqnorm;
pub use poisson::solve_poisson;
pub use ridge::{solve_ridge, solve_ridge_projected};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::SamplingMask;
use crate::seed;
use crate::tensor::{CpFactors, DenseTensor, Mat};

/// Factor initialization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Random factors globally rescaled so the initial estimate's Frobenius
    /// norm is RMS-matched to the observed entries.
    Svdrand,
    /// Random factors, no rescaling.
    Random,
}

/// Hyperparameters shared by the solvers. Field names follow the objective
/// definitions: `ridge_weight` is ε, `residual_radius` is δ (`None` means
/// the default 0.05·√|E|), `coupling` is κ, `slack_weight` is the slack
/// penalty, and `poisson_lower`/`poisson_upper` are the Poisson box [β, α].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub fit_rank: usize,
    pub ridge_weight: f64,
    pub residual_radius: Option<f64>,
    pub coupling: f64,
    pub slack_weight: f64,
    pub max_sweeps: usize,
    pub inner_tol: f64,
    pub init_mode: InitMode,
    pub rebalance: bool,
    pub poisson_lower: f64,
    pub poisson_upper: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            fit_rank: 1,
            ridge_weight: 0.01,
            residual_radius: None,
            coupling: 100.0,
            slack_weight: 1.0,
            max_sweeps: 100,
            inner_tol: 1e-8,
            init_mode: InitMode::Svdrand,
            rebalance: true,
            poisson_lower: 1.0,
            poisson_upper: 6.0,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Defaults with `fit_rank = 10·r`, the setting the completion
    /// experiments use.
    pub fn for_target_rank(r: usize) -> Self {
        Self {
            fit_rank: 10 * r.max(1),
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.fit_rank == 0 {
            return Err(Error::InvalidArgument("fit_rank must be at least 1".into()));
        }
        if self.inner_tol <= 0.0 || self.inner_tol.is_nan() {
            return Err(Error::InvalidArgument("inner_tol must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be positive".into()));
        }
        if self.ridge_weight < 0.0 || self.slack_weight <= 0.0 || self.coupling <= 0.0 {
            return Err(Error::InvalidArgument(
                "ridge_weight must be ≥ 0; coupling and slack_weight must be > 0".into(),
            ));
        }
        if let Some(delta) = self.residual_radius {
            if delta < 0.0 {
                return Err(Error::InvalidArgument("residual_radius must be ≥ 0".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn validate_poisson(&self) -> Result<()> {
        self.validate()?;
        if !(self.poisson_lower > 0.0 && self.poisson_upper >= self.poisson_lower) {
            return Err(Error::InvalidArgument(
                "Poisson box needs 0 < lower ≤ upper".into(),
            ));
        }
        Ok(())
    }

    /// Resolves δ: the configured radius or the default 0.05·√|E|.
    pub fn resolved_radius(&self, mask: &SamplingMask) -> f64 {
        self.residual_radius
            .unwrap_or_else(|| 0.05 * (mask.len() as f64).sqrt())
    }
}

/// Output of a completion solve.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub factors: CpFactors,
    pub estimate: DenseTensor,
    /// Per-sweep objective values (negative log-likelihood for Poisson).
    pub objective_trace: Vec<f64>,
    pub sweeps_used: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
    /// Poisson only: log-likelihood change caused by the final box clip.
    pub clamp_likelihood_gap: Option<f64>,
    /// Projected solvers only: ‖R‖_F of the slack at exit (≤ δ).
    pub slack_norm: Option<f64>,
}

/// Observed entries grouped for fast per-mode least-squares sweeps.
pub(crate) struct MaskedProblem<'a> {
    pub mask: &'a SamplingMask,
    /// Observed values aligned with `mask.tuples()` order.
    pub y: Vec<f64>,
    /// `rows[mode][k]` lists the observation indices with `e_mode = k`.
    pub rows: Vec<Vec<Vec<u32>>>,
}

impl<'a> MaskedProblem<'a> {
    pub fn new(observed: &DenseTensor, mask: &'a SamplingMask) -> Result<Self> {
        if observed.dims() != mask.dims() {
            return Err(Error::DimMismatch(format!(
                "observed dims {:?} vs mask dims {:?}",
                observed.dims(),
                mask.dims()
            )));
        }
        if mask.is_empty() {
            return Err(Error::InvalidArgument("mask reveals no entries".into()));
        }
        let y: Vec<f64> = mask
            .linear_indices()
            .iter()
            .map(|&lin| observed.values()[lin])
            .collect();
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(
                "observed entries on the mask must be finite".into(),
            ));
        }
        let t = mask.order();
        let mut rows: Vec<Vec<Vec<u32>>> =
            mask.dims().iter().map(|&n| vec![Vec::new(); n]).collect();
        for (o, tuple) in mask.tuples().enumerate() {
            for mode in 0..t {
                rows[mode][tuple[mode]].push(o as u32);
            }
        }
        Ok(Self { mask, y, rows })
    }

    pub fn observations(&self) -> usize {
        self.y.len()
    }

    /// Khatri-Rao weight row for observation `o` and the given mode:
    /// `w[l] = ∏_{j≠mode} U_j[e_j, l]`.
    #[inline]
    pub fn weight_row(&self, factors: &[Mat], mode: usize, o: usize, w: &mut [f64]) {
        let tuple = self.mask.tuple(o);
        w.fill(1.0);
        for (j, f) in factors.iter().enumerate() {
            if j == mode {
                continue;
            }
            let row = f.row(tuple[j]);
            for (wl, rl) in w.iter_mut().zip(row) {
                *wl *= rl;
            }
        }
    }

    /// Model values on the observed entries.
    pub fn eval(&self, factors: &[Mat]) -> Vec<f64> {
        let r = factors[0].cols();
        let mut out = vec![0.0; self.observations()];
        for (o, tuple) in self.mask.tuples().enumerate() {
            let mut sum = 0.0;
            for l in 0..r {
                let mut prod = 1.0;
                for (j, f) in factors.iter().enumerate() {
                    prod *= f.at(tuple[j], l);
                }
                sum += prod;
            }
            out[o] = sum;
        }
        out
    }
}

/// Frobenius norm of the CP tensor without densifying:
/// `‖T‖_F² = Σ_{l,l'} ∏_j ⟨U_j[:,l], U_j[:,l']⟩`.
pub(crate) fn cp_frobenius_norm(factors: &[Mat]) -> f64 {
    let r = factors[0].cols();
    let mut grams: Vec<Vec<f64>> = Vec::with_capacity(factors.len());
    for f in factors {
        let mut g = vec![0.0; r * r];
        for a in 0..r {
            for b in 0..r {
                let mut s = 0.0;
                for i in 0..f.rows() {
                    s += f.at(i, a) * f.at(i, b);
                }
                g[a * r + b] = s;
            }
        }
        grams.push(g);
    }
    let mut total = 0.0;
    for a in 0..r {
        for b in 0..r {
            let mut prod = 1.0;
            for g in &grams {
                prod *= g[a * r + b];
            }
            total += prod;
        }
    }
    total.max(0.0).sqrt()
}

/// Random factor initialization per `cfg.init_mode`. `nonneg` restricts the
/// entries to positives (Poisson solver).
pub(crate) fn init_factors(
    dims: &[usize],
    cfg: &SolverConfig,
    prob: &MaskedProblem,
    nonneg: bool,
) -> Vec<Mat> {
    let r = cfg.fit_rank;
    let mut rng = seed::rng_from(&[cfg.seed, 0x696e_6974]);
    let mut factors: Vec<Mat> = dims
        .iter()
        .map(|&n| {
            let data: Vec<f64> = (0..n * r)
                .map(|_| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    if nonneg {
                        g.abs() + 0.05
                    } else {
                        g
                    }
                })
                .collect();
            Mat::new(n, r, data).expect("generated data matches shape")
        })
        .collect();

    if cfg.init_mode == InitMode::Svdrand {
        let total: usize = dims.iter().product();
        let y_norm = prob.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let target = (total as f64 / prob.observations() as f64).sqrt() * y_norm;
        let actual = cp_frobenius_norm(&factors);
        if actual > 1e-300 && target > 0.0 {
            let scale = (target / actual).powf(1.0 / dims.len() as f64);
            for f in &mut factors {
                f.scale(scale);
            }
        }
    }
    factors
}

/// Geometric-mean rebalancing: rescales each factor so all max row norms
/// are equal while preserving the factor product (the expanded tensor is
/// unchanged).
pub(crate) fn rebalance_factors(factors: &mut [Mat]) {
    let norms: Vec<f64> = factors.iter().map(|f| f.max_row_norm()).collect();
    if norms.iter().any(|&c| c <= 1e-300) {
        return;
    }
    let t = factors.len() as f64;
    let log_mean = norms.iter().map(|c| c.ln()).sum::<f64>() / t;
    let g = log_mean.exp();
    for (f, &c) in factors.iter_mut().zip(&norms) {
        f.scale(g / c);
    }
}

/// Accumulates the per-row Gram matrix and right-hand side for a mode's
/// regularized least-squares update:
/// `G = Σ_o w_o w_oᵀ`, `rhs = Σ_o target_o w_o` over the row's observations.
#[allow(clippy::too_many_arguments)]
pub(crate) fn row_normal_equations(
    prob: &MaskedProblem,
    factors: &[Mat],
    mode: usize,
    row: usize,
    target: &[f64],
    gram: &mut [f64],
    rhs: &mut [f64],
    wbuf: &mut [f64],
) {
    let r = rhs.len();
    gram.fill(0.0);
    rhs.fill(0.0);
    for &o in &prob.rows[mode][row] {
        let o = o as usize;
        prob.weight_row(factors, mode, o, wbuf);
        let yv = target[o];
        for a in 0..r {
            let wa = wbuf[a];
            rhs[a] += yv * wa;
            let ga = &mut gram[a * r..a * r + r];
            for b in 0..r {
                ga[b] += wa * wbuf[b];
            }
        }
    }
}

pub(crate) fn warn_if_overparameterized(
    cfg: &SolverConfig,
    dims: &[usize],
    warnings: &mut Vec<String>,
) {
    if let Some(&n_min) = dims.iter().min() {
        if cfg.fit_rank > n_min {
            warnings.push(format!(
                "fit_rank {} exceeds the smallest dimension {n_min}; excess components decay under regularization",
                cfg.fit_rank
            ));
        }
    }
}
