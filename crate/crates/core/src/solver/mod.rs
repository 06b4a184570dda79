//! Almost cyclic 2-coordinate descent.
//!
//! Each outer iteration fixes an index `j(k)` whose coordinate is far enough
//! from its bounds, then sweeps a permutation of all indices, moving mass
//! between `p` and `j(k)` along `d = g(e_p − e_j)` with `g = ∇_j f − ∇_p f`.

mod index;
mod stepsize;
mod sweep;
mod trace;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::problem::{kkt_residual, FeasiblePoint, Objective, Problem, ProblemError};

pub use index::{max_bound_distance, select_index_rate_mode, select_index_threshold, IndexRule};
pub use stepsize::{
    armijo_stepsize, exact_line_search, lipschitz_stepsize, max_feasible_stepsize, quadratic_stepsize, StepsizeRule,
    MAX_BACKTRACKS,
};
pub use sweep::{
    apply_step, check_termination, compute_stepsize, pair_is_pinned, run_inner_sweep, take_pair_step,
    InnerStepRecord, PairStep, SolverState, DRIFT_TOL,
};
pub use trace::{FailureKind, OuterRecord, RunStatus, RunTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct Ac2cdConfig {
    pub tau: f64,
    pub index_rule: IndexRule,
    pub stepsize: StepsizeRule,
    pub epsilon: f64,
    pub max_outer: usize,
    pub rng_seed: u64,
    /// Draw a fresh permutation every outer iteration; otherwise sweep in
    /// index order.
    pub shuffle_each_outer: bool,
    /// Record the full-gradient residual at every outer iteration (costs one
    /// gradient per iteration). The final record always carries it.
    pub record_kkt: bool,
    /// Outer iterations between cache rebuilds.
    pub refresh_interval: usize,
}

impl Default for Ac2cdConfig {
    fn default() -> Self {
        Self {
            tau: 0.9,
            index_rule: IndexRule::ThresholdAny,
            stepsize: StepsizeRule::default(),
            epsilon: 0.1,
            max_outer: 100_000,
            rng_seed: 0,
            shuffle_each_outer: true,
            record_kkt: false,
            refresh_interval: 1000,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

impl Ac2cdConfig {
    pub fn validate(&self, n: usize) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::Config(m.to_string()));
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0,1]");
        }
        if self.index_rule == IndexRule::RateMode && self.tau >= 1.0 {
            return bad("rate mode needs tau < 1");
        }
        if let IndexRule::Fixed(j) = self.index_rule {
            if j >= n {
                return bad("fixed index out of range");
            }
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.refresh_interval == 0 {
            return bad("refresh_interval must be positive");
        }
        self.stepsize.validate().map_err(SolverError::Config)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub x: Vec<f64>,
    pub trace: RunTrace,
}

fn full_kkt<O: Objective>(problem: &Problem<O>, cache: &O::Cache, x: &[f64]) -> Option<f64> {
    let f = problem.objective();
    let grad: Vec<f64> = (0..problem.dim()).map(|i| f.cached_partial(cache, x, i)).collect();
    kkt_residual(problem.bounds(), x, &grad).ok()
}

pub fn solve<O: Objective>(
    problem: &Problem<O>,
    x0: &FeasiblePoint,
    config: &Ac2cdConfig,
) -> Result<SolveOutput, SolverError> {
    solve_with_observer(problem, x0, config, &mut |_, _| {})
}

/// [`solve`] with a callback for every inner step and post-step iterate.
pub fn solve_with_observer<O: Objective>(
    problem: &Problem<O>,
    x0: &FeasiblePoint,
    config: &Ac2cdConfig,
    observer: &mut dyn FnMut(&InnerStepRecord, &[f64]),
) -> Result<SolveOutput, SolverError> {
    let n = problem.dim();
    if x0.len() != n {
        return Err(ProblemError::DimensionMismatch { expected: n, got: x0.len() }.into());
    }
    config.validate(n)?;
    let start = Instant::now();
    let f = problem.objective();
    let mut state = SolverState::new(problem, x0.to_vec(), 0);
    let mut trace = RunTrace::new("ac2cd");
    trace.records.push(OuterRecord {
        k: 0,
        objective: f.cached_value(&state.cache, &state.x),
        kkt_residual: full_kkt(problem, &state.cache, &state.x),
        g_min: f64::INFINITY,
        g_max: f64::NEG_INFINITY,
        partial_evals: 0,
        pair_updates: 0,
        j: None,
        elapsed_secs: start.elapsed().as_secs_f64(),
    });
    if problem.is_singleton() {
        trace.status = RunStatus::Converged;
        return Ok(SolveOutput { x: state.x, trace });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut j_prev = None;
    let mut status = RunStatus::MaxOuter;
    for k in 0..config.max_outer {
        let selected = match config.index_rule {
            IndexRule::ThresholdAny => select_index_threshold(problem.bounds(), &state.x, config.tau),
            IndexRule::RateMode => select_index_rate_mode(problem.bounds(), &state.x, j_prev, config.tau),
            IndexRule::Fixed(j) => Ok(j),
        };
        state.j = match selected {
            Ok(j) => j,
            Err(kind) => {
                status = RunStatus::NumericalFailure(kind);
                break;
            }
        };
        j_prev = Some(state.j);
        if config.shuffle_each_outer {
            perm.shuffle(&mut rng);
        }
        state.reset_extremes();
        let swept = run_inner_sweep(problem, &mut state, k, &perm, &config.stepsize, observer);
        if (k + 1) % config.refresh_interval == 0 {
            state.cache = f.build_cache(&state.x);
        }
        let objective = f.cached_value(&state.cache, &state.x);
        let mut kkt = None;
        let mut done = false;
        if let Err(kind) = swept {
            status = RunStatus::NumericalFailure(kind);
            done = true;
        } else if !objective.is_finite() {
            status = RunStatus::NumericalFailure(FailureKind::NonFinite);
            done = true;
        } else if check_termination(state.g_min, state.g_max, config.epsilon) {
            kkt = full_kkt(problem, &state.cache, &state.x);
            state.partial_evals += n as u64;
            if kkt.is_some_and(|r| r <= config.epsilon) {
                status = RunStatus::Converged;
                done = true;
            }
        } else if config.record_kkt {
            kkt = full_kkt(problem, &state.cache, &state.x);
        }
        trace.records.push(OuterRecord {
            k: k + 1,
            objective,
            kkt_residual: kkt,
            g_min: state.g_min,
            g_max: state.g_max,
            partial_evals: state.partial_evals,
            pair_updates: state.pair_updates,
            j: Some(state.j),
            elapsed_secs: start.elapsed().as_secs_f64(),
        });
        if done {
            break;
        }
    }
    let last = trace.records.last_mut().expect("starting record present");
    if last.kkt_residual.is_none() {
        last.kkt_residual = full_kkt(problem, &state.cache, &state.x);
    }
    trace.status = status;
    Ok(SolveOutput { x: state.x, trace })
}
