//! Comparison methods: random 2-coordinate descent and the maximal violating
//! pair method.
//!
//! Both produce a [`RunTrace`] with the same fields as the almost cyclic
//! solver so that runs can be compared record by record.

mod mvp;
mod rcd;
mod sampler;

use crate::problem::Objective;
use crate::solver::{RunTrace, SolverError, StepsizeRule};

pub use mvp::{mvp_select, run_mvp};
pub use rcd::run_rcd;
pub use sampler::{decode_pair, encode_pair, pair_count, PairSampler, WEIGHTED_MAX_DIM};

/// When a baseline run counts as finished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineStop {
    /// Normalized error `(f − f_target)/(1 + |f_target|) ≤ nu`.
    Target { f_target: f64, nu: f64 },
    /// Stationarity within `epsilon` (the method's own residual criterion).
    Stationarity { epsilon: f64 },
}

impl BaselineStop {
    pub fn reached_target(&self, f: f64) -> bool {
        match *self {
            BaselineStop::Target { f_target, nu } => normalized_error(f, f_target) <= nu,
            BaselineStop::Stationarity { .. } => false,
        }
    }
}

/// `(f − f_target)/(1 + |f_target|)`.
pub fn normalized_error(f: f64, f_target: f64) -> f64 {
    (f - f_target) / (1.0 + f_target.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMode {
    Uniform,
    LipschitzWeighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcdConfig {
    pub sampler: SamplerMode,
    pub stepsize: StepsizeRule,
    pub stop: BaselineStop,
    /// Outer iterations of `n` sampled pairs each.
    pub max_outer: usize,
    pub rng_seed: u64,
    pub refresh_interval: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MvpConfig {
    pub stop: BaselineStop,
    pub line_search: StepsizeRule,
    /// Pair updates, each one iteration.
    pub max_iterations: usize,
    /// Iterations between trace records (the final state is always recorded).
    pub record_stride: usize,
}

/// Pair stepsize the random method uses on `objective`: the exact quadratic
/// step when pair curvatures are available, otherwise the Lipschitz step with
/// `γ = 1/2`.
pub fn default_rcd_stepsize<O: Objective>(objective: &O) -> StepsizeRule {
    if objective.dim() >= 2 && objective.pair_curvature(0, 1).is_some() {
        StepsizeRule::quadratic()
    } else {
        StepsizeRule::lipschitz()
    }
}

#[derive(Debug, Clone)]
pub struct BaselineOutput {
    pub x: Vec<f64>,
    pub trace: RunTrace,
}

fn validate_stop(stop: &BaselineStop) -> Result<(), SolverError> {
    match *stop {
        BaselineStop::Target { f_target, nu } if !(f_target.is_finite() && nu >= 0.0) => {
            Err(SolverError::Config("target stop needs a finite target and nu >= 0".into()))
        }
        BaselineStop::Stationarity { epsilon } if !(epsilon > 0.0) => {
            Err(SolverError::Config("epsilon must be positive".into()))
        }
        _ => Ok(()),
    }
}
