//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use specgap_core::atomic;
use specgap_core::bounds::{self, BoundInputs, BoundKind};
use specgap_core::experiment::{
    self, regression_report, svg::render_scatter, Algorithm, ExperimentConfig,
};
use specgap_core::graph::{self, RegularGraph};
use specgap_core::mask::{self, Lambda2Params, SamplingMask};
use specgap_core::solvers::{self, SolverConfig, SolverResult};
use specgap_core::tensor::DenseTensor;
use specgap_core::verify::{run_all, VerifyOptions};

use crate::manifest::RunManifest;
use crate::{CliError, CliResult};

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_tensor(path: &Path) -> CliResult<DenseTensor> {
    Ok(DenseTensor::parse_text(&read_file(path)?)?)
}

fn load_graph(path: &Path) -> CliResult<RegularGraph> {
    Ok(RegularGraph::parse_text(&read_file(path)?)?)
}

fn load_mask(path: &Path) -> CliResult<SamplingMask> {
    Ok(SamplingMask::parse_text(&read_file(path)?)?)
}

// ---------------------------------------------------------------------------
// gen-graph

#[derive(Args)]
pub struct GenGraphArgs {
    /// Vertex count.
    #[arg(long)]
    n: usize,
    /// Degree (even: d-connected ring; odd: ring plus antipodal matching).
    #[arg(long)]
    d: usize,
    /// Accepted switch-chain swaps to apply.
    #[arg(long, default_value_t = 0)]
    swaps: u64,
    #[arg(long)]
    seed: u64,
    /// Output graph file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn gen_graph(args: GenGraphArgs) -> CliResult<()> {
    let base = graph::base_graph(args.n, args.d)?;
    let outcome = graph::switch_chain_counted(&base, args.swaps, args.seed);
    let text = outcome.graph.to_text();
    eprintln!(
        "n={} d={} accepted_swaps={} proposed_swaps={}",
        args.n, args.d, outcome.accepted, outcome.proposed
    );
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            RunManifest::new("gen-graph")
                .seed(args.seed)
                .config(&serde_json::json!({
                    "n": args.n, "d": args.d, "swaps": args.swaps,
                    "accepted": outcome.accepted, "proposed": outcome.proposed,
                }))
                .output(path)
                .write_alongside(path)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// graph-lambda

#[derive(Args)]
pub struct GraphLambdaArgs {
    /// Graph file (`n d` header, one `u v` edge per line).
    file: PathBuf,
}

pub fn graph_lambda(args: GraphLambdaArgs) -> CliResult<()> {
    let g = load_graph(&args.file)?;
    let lambda = graph::second_eigenvalue(&g)?;
    println!("{lambda}");
    Ok(())
}

// ---------------------------------------------------------------------------
// lift

#[derive(Args)]
pub struct LiftArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Tensor order t (hyperedges are walks of length t−1).
    #[arg(long)]
    t: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn lift(args: LiftArgs) -> CliResult<()> {
    let g = load_graph(&args.graph)?;
    let mask = mask::lift_graph(&g, args.t)?;
    eprintln!("|E| = {} over dims {:?}", mask.len(), mask.dims());
    let text = mask.to_text();
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            RunManifest::new("lift")
                .config(&serde_json::json!({"t": args.t, "e_count": mask.len()}))
                .input(&args.graph)
                .output(path)
                .write_alongside(path)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// grid-mask

#[derive(Args)]
pub struct GridMaskArgs {
    /// Comma-separated dims, e.g. `100,100,100`.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long)]
    fraction: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn grid_mask(args: GridMaskArgs) -> CliResult<()> {
    let mask = mask::grid_mask(&args.dims, args.fraction)?;
    eprintln!("|E| = {}", mask.len());
    let text = mask.to_text();
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            RunManifest::new("grid-mask")
                .config(&serde_json::json!({"dims": args.dims, "fraction": args.fraction}))
                .output(path)
                .write_alongside(path)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// shuffle-mask

#[derive(Args)]
pub struct ShuffleMaskArgs {
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    fraction: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn shuffle_mask(args: ShuffleMaskArgs) -> CliResult<()> {
    let m = load_mask(&args.mask)?;
    let shuffled = mask::shuffle_mask(&m, args.fraction, args.seed)?;
    let text = shuffled.to_text();
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            RunManifest::new("shuffle-mask")
                .seed(args.seed)
                .config(&serde_json::json!({"fraction": args.fraction}))
                .input(&args.mask)
                .output(path)
                .write_alongside(path)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// estimate-gap

#[derive(Args)]
pub struct EstimateGapArgs {
    #[arg(long)]
    mask: PathBuf,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long)]
    seed: u64,
}

pub fn estimate_gap(args: EstimateGapArgs) -> CliResult<()> {
    let m = load_mask(&args.mask)?;
    let params = Lambda2Params {
        restarts: args.restarts,
        sweeps: args.sweeps,
        seed: args.seed,
    };
    let estimate = mask::estimate_lambda2(&m, params);
    println!("{estimate}");
    Ok(())
}

// ---------------------------------------------------------------------------
// atomic-norm

#[derive(Args)]
pub struct AtomicNormArgs {
    /// Tensor file (`t n_1 … n_t` header then row-major values).
    file: PathBuf,
}

pub fn atomic_norm(args: AtomicNormArgs) -> CliResult<()> {
    let t = load_tensor(&args.file)?;
    let decomp = atomic::atomic_norm(&t)?;
    println!("atomic_norm {}", decomp.value);
    println!("atoms {}", decomp.atoms.len());
    for (atom, coef) in decomp.atoms.iter().zip(&decomp.coefficients) {
        let signs: Vec<String> = atom
            .signs()
            .iter()
            .map(|s| s.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect())
            .collect();
        println!("{coef:+.12}  {}", signs.join("|"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// complete

#[derive(Clone, Deserialize)]
struct InlineTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl InlineTensor {
    fn into_tensor(self) -> CliResult<DenseTensor> {
        Ok(DenseTensor::new(self.dims, self.values)?)
    }
}

/// JSON config for `complete`: solver hyperparameters plus optionally
/// inline tensors.
#[derive(Default, Deserialize)]
#[serde(default)]
struct CompleteConfig {
    solver: Option<SolverConfig>,
    tensor: Option<InlineTensor>,
    truth: Option<InlineTensor>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Ridge,
    #[value(name = "ridge-proj")]
    RidgeProj,
    Maxq,
    Poisson,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Ridge => Algorithm::Ridge,
            AlgoArg::RidgeProj => Algorithm::RidgeProj,
            AlgoArg::Maxq => Algorithm::Maxq,
            AlgoArg::Poisson => Algorithm::Poisson,
        }
    }
}

#[derive(Args)]
pub struct CompleteArgs {
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[arg(long)]
    mask: PathBuf,
    /// Observed tensor file (counts for the Poisson solver). May instead be
    /// embedded in the config as `tensor: {dims, values}`.
    #[arg(long)]
    tensor: Option<PathBuf>,
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ground-truth tensor for error reporting.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Write the dense estimate to this tensor file.
    #[arg(long)]
    out_estimate: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    r_fit: Option<usize>,
    #[arg(long)]
    max_sweeps: Option<usize>,
}

pub fn complete(args: CompleteArgs) -> CliResult<()> {
    let file_cfg: CompleteConfig = match &args.config {
        Some(path) => serde_json::from_str(&read_file(path)?)
            .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))?,
        None => CompleteConfig::default(),
    };

    // precedence: built-in defaults < JSON config < command-line flags
    let mut solver_cfg = file_cfg.solver.unwrap_or_default();
    if let Some(seed) = args.seed {
        solver_cfg.seed = seed;
    }
    if let Some(r_fit) = args.r_fit {
        solver_cfg.fit_rank = r_fit;
    }
    if let Some(max_sweeps) = args.max_sweeps {
        solver_cfg.max_sweeps = max_sweeps;
    }

    let observed = match (&args.tensor, file_cfg.tensor) {
        (Some(path), _) => load_tensor(path)?,
        (None, Some(inline)) => inline.into_tensor()?,
        (None, None) => {
            return Err(CliError::Usage(
                "no observed tensor: pass --tensor or embed `tensor` in the config".into(),
            ))
        }
    };
    let truth = match (&args.truth, file_cfg.truth) {
        (Some(path), _) => Some(load_tensor(path)?),
        (None, Some(inline)) => Some(inline.into_tensor()?),
        (None, None) => None,
    };
    let m = load_mask(&args.mask)?;

    let result: SolverResult = match args.algo {
        AlgoArg::Ridge => solvers::solve_ridge(&observed, &m, &solver_cfg)?,
        AlgoArg::RidgeProj => solvers::solve_ridge_projected(&observed, &m, &solver_cfg)?,
        AlgoArg::Maxq => solvers::solve_maxqnorm(&observed, &m, &solver_cfg)?,
        AlgoArg::Poisson => solvers::solve_poisson(&observed, &m, &solver_cfg)?,
    };

    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    match &truth {
        Some(t) => {
            if t.dims() != result.estimate.dims() {
                return Err(CliError::Usage(
                    "truth dims do not match the estimate".into(),
                ));
            }
            let diff_sq: f64 = result
                .estimate
                .values()
                .iter()
                .zip(t.values())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let rel = diff_sq.sqrt() / t.frobenius_norm();
            let mse = diff_sq / t.len() as f64;
            println!("rel_error {rel}");
            println!("mse {mse}");
        }
        None => {
            let lins = m.linear_indices();
            let (mut diff_sq, mut obs_sq) = (0.0f64, 0.0f64);
            for &lin in &lins {
                let d = result.estimate.values()[lin] - observed.values()[lin];
                diff_sq += d * d;
                obs_sq += observed.values()[lin] * observed.values()[lin];
            }
            let rel = if obs_sq > 0.0 {
                (diff_sq / obs_sq).sqrt()
            } else {
                diff_sq.sqrt()
            };
            println!("rel_error_observed {rel}");
            println!("mse_observed {}", diff_sq / lins.len() as f64);
        }
    }
    println!("sweeps {}", result.sweeps_used);
    println!("converged {}", result.converged);
    println!(
        "objective {}",
        result.objective_trace.last().copied().unwrap_or(f64::NAN)
    );
    if let Some(gap) = result.clamp_likelihood_gap {
        println!("clamp_likelihood_gap {gap}");
    }
    if let Some(path) = &args.out_estimate {
        write_file(path, &result.estimate.to_text())?;
        RunManifest::new("complete")
            .seed(solver_cfg.seed)
            .config(&solver_cfg)
            .input(&args.mask)
            .output(path)
            .write_alongside(path)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bound

#[derive(Clone, Copy, ValueEnum)]
pub enum BoundKindArg {
    Thm3,
    Thm4,
    #[value(name = "thm4-rank")]
    Thm4Rank,
    #[value(name = "poisson-general")]
    PoissonGeneral,
    #[value(name = "poisson-lifted")]
    PoissonLifted,
    #[value(name = "sample-complexity")]
    SampleComplexity,
}

impl From<BoundKindArg> for BoundKind {
    fn from(k: BoundKindArg) -> Self {
        match k {
            BoundKindArg::Thm3 => BoundKind::Thm3,
            BoundKindArg::Thm4 => BoundKind::Thm4,
            BoundKindArg::Thm4Rank => BoundKind::Thm4Rank,
            BoundKindArg::PoissonGeneral => BoundKind::PoissonGeneral,
            BoundKindArg::PoissonLifted => BoundKind::PoissonLifted,
            BoundKindArg::SampleComplexity => BoundKind::SampleComplexity,
        }
    }
}

#[derive(Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    kind: BoundKindArg,
    /// Emit the full report as JSON.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    t: Option<u32>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    lambda2_h: Option<f64>,
    #[arg(long)]
    e_count: Option<f64>,
    #[arg(long)]
    atomic_norm: Option<f64>,
    #[arg(long)]
    linf: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Absolute constant C of the Poisson bounds (default 1).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

pub fn bound(args: BoundArgs) -> CliResult<()> {
    let inputs = BoundInputs {
        n: args.n,
        t: args.t,
        r: args.r,
        d: args.d,
        lambda: args.lambda,
        lambda2_h: args.lambda2_h,
        e_count: args.e_count,
        atomic_norm: args.atomic_norm,
        linf: args.linf,
        alpha: args.alpha,
        beta: args.beta,
        c: args.c,
        epsilon: args.epsilon,
    };
    let report = bounds::evaluate_bound(args.kind.into(), &inputs)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Io(format!("report serialization: {e}")))?
        );
    } else {
        println!("{}", report.value);
        if report.qualitative {
            eprintln!("note: qualitative only (the absolute constant C is not known)");
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// experiment

#[derive(Args)]
pub struct ExperimentArgs {
    /// Experiment JSON config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for records.csv, regression.json, scatter.svg.
    #[arg(long)]
    out: PathBuf,
    /// Master seed (required: sweeps are fully seed-driven).
    #[arg(long)]
    seed: u64,
}

pub fn experiment(args: ExperimentArgs) -> CliResult<()> {
    // a run manifest is accepted in place of a config: its resolved_config
    // block reproduces the original run
    let raw: serde_json::Value = serde_json::from_str(&read_file(&args.config)?)
        .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", args.config.display())))?;
    let cfg_value = match raw.get("resolved_config") {
        Some(inner) if raw.get("subcommand").is_some() => inner.clone(),
        _ => raw,
    };
    let mut cfg: ExperimentConfig = serde_json::from_value(cfg_value)
        .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", args.config.display())))?;
    cfg.master_seed = args.seed;

    let output = experiment::run_sweep(&cfg)?;
    for f in &output.failures {
        eprintln!(
            "trial failed (point {}, trial {}): {}",
            f.point, f.trial, f.message
        );
    }
    if output.records.is_empty() {
        return Err(CliError::VerifyFailed(
            "every trial in the sweep failed".into(),
        ));
    }

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    let csv_path = args.out.join("records.csv");
    write_file(&csv_path, &experiment::to_csv(&output.records))?;

    let regression_json = match regression_report(&output.records, cfg.lambda2_cutoff) {
        Ok(rep) => serde_json::to_string_pretty(&rep)
            .map_err(|e| CliError::Io(format!("regression serialization: {e}")))?,
        Err(e) => serde_json::to_string_pretty(&serde_json::json!({ "error": e.to_string() }))
            .map_err(|e| CliError::Io(format!("regression serialization: {e}")))?,
    };
    write_file(&args.out.join("regression.json"), &regression_json)?;

    let points = experiment::regression_points(&output.records);
    let fit = experiment::fit_line_xy(&points, None).ok();
    let y_label = if cfg.algorithm == Algorithm::Poisson {
        "MSE"
    } else {
        "relative error"
    };
    let title = format!(
        "{} n={} t={} r={} (|E| = {})",
        cfg.algorithm, cfg.n, cfg.t, cfg.r, output.records[0].e_count
    );
    let svg = render_scatter(&title, &points, fit.as_ref(), "gap statistic", y_label);
    write_file(&args.out.join("scatter.svg"), &svg)?;

    RunManifest::new("experiment")
        .seed(args.seed)
        .config(&cfg)
        .input(&args.config)
        .output(&csv_path)
        .output(&args.out.join("regression.json"))
        .output(&args.out.join("scatter.svg"))
        .write_alongside(&args.out)?;

    println!("records {}", output.records.len());
    println!("failures {}", output.failures.len());
    if let Some(fit) = fit {
        println!("slope {}", fit.slope);
        println!("intercept {}", fit.intercept);
        println!("r2 {}", fit.r2);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

#[derive(Args)]
pub struct VerifyArgs {
    /// Reduced suites that finish within an interactive budget.
    #[arg(long)]
    quick: bool,
    /// Master seed (required: the suites are randomized).
    #[arg(long)]
    seed: u64,
}

pub fn verify(args: VerifyArgs) -> CliResult<()> {
    let reports = run_all(VerifyOptions {
        quick: args.quick,
        seed: args.seed,
    });
    let mut failed = 0usize;
    for report in &reports {
        let status = if report.passed() { "PASS" } else { "FAIL" };
        println!("{status} {} ({} checks)", report.name, report.checks);
        for v in report.violations.iter().take(10) {
            println!("  violation: {v}");
        }
        if !report.passed() {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(CliError::VerifyFailed(format!(
            "{failed} suite(s) reported violations"
        )));
    }
    Ok(())
}
