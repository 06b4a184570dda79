//! Independent oracles for testing the solvers: finite differences, a
//! brute-force scalar line search, the reduced problem in `n − 1` free
//! coordinates, an optimum oracle for the separable family, rate estimates and
//! Hessian inertia.

mod eigen;
mod fd;
mod line_search;
mod probes;
mod rate;
mod transformed;

use thiserror::Error;

use crate::solver::SolverError;

pub use eigen::{eigen_stats, EigenStats, EIGEN_MAX_DIM};
pub use fd::{finite_diff_gradient, max_relative_error};
pub use line_search::brute_force_line_search;
pub use probes::{
    check_step_contracts, gradient_consistency, line_search_probe, random_feasible_point, random_pair,
    LineSearchProbe, StepViolations, CONTRACT_SLACK, FD_STEP, LINE_SEARCH_GRID,
};
pub use rate::{
    asymptotic_rate_check, fit_contraction, gap_floor, logexp_optimum, rate_bound_check, rate_constant, RateReport,
    TAIL_WINDOW,
};
pub use transformed::{trajectory_equivalence, TransformedProblem};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("optimum unavailable: {0}")]
    OptimumUnavailable(String),
    #[error("{0}")]
    Setup(String),
    #[error(transparent)]
    Solver(SolverError),
}
