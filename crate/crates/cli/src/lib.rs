//! Benchmark front end: experiment configuration, protocol runs, trace and
//! summary output, and the oracle check suite behind `ac2cd verify`.

pub mod checks;
pub mod config;
pub mod curve;
pub mod experiment;
pub mod output;
pub mod summary;

use thiserror::Error;

pub use config::{ExperimentConfig, MethodKind, MethodSpec, StepsizeName};
pub use experiment::{run_experiment, run_experiment_with_threads, ExperimentOutput, RunResult};
pub use summary::SummaryRow;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("instance error: {0}")]
    Instance(#[from] ac2cd_core::suite::SuiteError),
    #[error("solver error: {0}")]
    Solver(#[from] ac2cd_core::solver::SolverError),
    #[error("infeasible start: {0}")]
    Problem(#[from] ac2cd_core::ProblemError),
    #[error("i/o error: {0}")]
    Io(String),
}
