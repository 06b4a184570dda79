//! Two-coordinate descent for problems of the form
//!
//! ```text
//! min f(x)  s.t.  Σ x_i = b,  l ≤ x ≤ u
//! ```
//!
//! with possibly infinite bounds. The crate provides the almost cyclic solver
//! ([`solver`]), random and greedy baselines ([`baselines`]), the benchmark
//! instance families ([`suite`]) and independent checks ([`verify`]).

pub mod baselines;
pub mod extended;
pub mod problem;
pub mod solver;
pub mod suite;
pub mod verify;

pub use extended::ExtReal;
pub use problem::{Bounds, FeasiblePoint, Objective, Problem, ProblemError};
pub use solver::{solve, Ac2cdConfig, IndexRule, RunStatus, RunTrace, StepsizeRule};
