//! Incremental training of single-hidden-layer networks (extreme learning
//! machines) by adding hidden nodes one at a time and updating the ridge
//! output weights without re-solving.
//!
//! * [`linalg`]: dense matrices, Cholesky solves, flop accounting.
//! * [`model`]: random hidden layer and network evaluation.
//! * [`solvers`]: the incremental output-weight solvers.
//! * [`evaluation`]: error measures, metrics, cross-validation splits.
//! * [`data`]: CSV ingestion, normalization, synthetic datasets.
//! * [`experiment`]: lockstep growth runs, benchmarks, cross-validation.
//! * [`cli`]: the `ifelm` command line.

pub mod error;
pub mod linalg;
pub mod model;
pub mod solvers;
pub mod evaluation;
pub mod data;
pub mod experiment;
pub mod cli;

pub use error::{ElmError, Result};
pub use linalg::{FlopCounter, Matrix};
pub use model::{ActivationKind, ElmParams};
pub use solvers::{AlgorithmKind, SolverState, StepScalars};
