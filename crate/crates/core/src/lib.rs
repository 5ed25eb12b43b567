//! Spectral-gap-driven deterministic tensor completion.
//!
//! The crate builds sampling masks with a tunable spectral gap (graph
//! lifting and grid/shuffle constructions), estimates that gap, solves the
//! completion problem under four objectives (ridge, projected ridge,
//! max-quasinorm, Poisson maximum likelihood), evaluates the closed-form
//! error-bound right-hand sides, and verifies the atomic-norm theory with
//! an exact small-scale LP oracle.

pub mod atomic;
pub mod bounds;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod mask;
pub mod seed;
pub mod simplex;
pub mod solvers;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use tensor::{CpFactors, DenseTensor, Mat};
