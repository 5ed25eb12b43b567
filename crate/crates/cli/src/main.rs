//! `specgap`: sampling-mask construction, gap estimation, completion
//! solvers, bound evaluation, experiments, and the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O
//! error, 4 numerical non-convergence.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use specgap_core::Error as CoreError;

pub const EXIT_VERIFY_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NONCONVERGENCE: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Usage(String),
    Io(String),
    VerifyFailed(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::VerifyFailed(_) => EXIT_VERIFY_FAILURE,
            CliError::Core(e) => match e {
                CoreError::Io(_) | CoreError::Parse(_) => EXIT_IO,
                CoreError::NonConvergence { .. } | CoreError::LpFailure(_) => EXIT_NONCONVERGENCE,
                _ => EXIT_USAGE,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::VerifyFailed(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "specgap",
    version,
    about = "Spectral-gap-driven deterministic tensor completion",
    arg_required_else_help = true
)]
struct Cli {
    /// Cap worker concurrency (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a d-regular base graph and apply switch-chain swaps.
    GenGraph(commands::GenGraphArgs),
    /// Print the second eigenvalue (in absolute value) of a graph file.
    GraphLambda(commands::GraphLambdaArgs),
    /// Lift a graph file into an order-t sampling mask.
    Lift(commands::LiftArgs),
    /// Build an evenly spaced grid mask.
    GridMask(commands::GridMaskArgs),
    /// Move a fraction of a mask's entries to random unobserved positions.
    ShuffleMask(commands::ShuffleMaskArgs),
    /// Estimate λ₂(H) of a mask by rank-1 ALS.
    EstimateGap(commands::EstimateGapArgs),
    /// Exact atomic norm of a tiny tensor via the LP oracle.
    AtomicNorm(commands::AtomicNormArgs),
    /// Run a completion solver on a masked tensor.
    Complete(commands::CompleteArgs),
    /// Evaluate an error-bound right-hand side.
    Bound(commands::BoundArgs),
    /// Run a gap-vs-error sweep from a JSON config.
    Experiment(commands::ExperimentArgs),
    /// Run the randomized property suites; exits nonzero on any violation.
    Verify(commands::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: failed to configure thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match cli.command {
        Command::GenGraph(args) => commands::gen_graph(args),
        Command::GraphLambda(args) => commands::graph_lambda(args),
        Command::Lift(args) => commands::lift(args),
        Command::GridMask(args) => commands::grid_mask(args),
        Command::ShuffleMask(args) => commands::shuffle_mask(args),
        Command::EstimateGap(args) => commands::estimate_gap(args),
        Command::AtomicNorm(args) => commands::atomic_norm(args),
        Command::Complete(args) => commands::complete(args),
        Command::Bound(args) => commands::bound(args),
        Command::Experiment(args) => commands::experiment(args),
        Command::Verify(args) => commands::verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
