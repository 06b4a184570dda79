use std::time::Instant;

use super::{validate_stop, BaselineOutput, BaselineStop, MvpConfig};
use crate::problem::{Bounds, FeasiblePoint, Objective, Problem, ProblemError};
use crate::solver::{take_pair_step, FailureKind, OuterRecord, RunStatus, RunTrace, SolverError};

/// Iterations between cache rebuilds.
const CACHE_REFRESH: usize = 10_000;

/// Maximal violating pair `(i, j)`: `i` minimizes `∇_i f` over `x_i < u_i`,
/// `j` maximizes `∇_j f` over `x_j > l_j`, smallest index on ties.
///
/// Returns the pair and the violation `∇_j f − ∇_i f`, or `None` if either
/// index set is empty.
pub fn mvp_select(bounds: &Bounds, x: &[f64], grad: &[f64]) -> Option<(usize, usize, f64)> {
    let mut best_i: Option<usize> = None;
    let mut best_j: Option<usize> = None;
    for h in 0..x.len() {
        if bounds.below_upper(h, x[h]) && best_i.is_none_or(|i| grad[h] < grad[i]) {
            best_i = Some(h);
        }
        if bounds.above_lower(h, x[h]) && best_j.is_none_or(|j| grad[h] > grad[j]) {
            best_j = Some(h);
        }
    }
    let (i, j) = (best_i?, best_j?);
    Some((i, j, grad[j] - grad[i]))
}

/// Maximal violating pair method with exact line search. Each iteration
/// computes the full gradient (maintained incrementally for separable
/// objectives) and moves mass from `j` to `i`.
pub fn run_mvp<O: Objective>(
    problem: &Problem<O>,
    x0: &FeasiblePoint,
    config: &MvpConfig,
) -> Result<BaselineOutput, SolverError> {
    let n = problem.dim();
    if x0.len() != n {
        return Err(ProblemError::DimensionMismatch { expected: n, got: x0.len() }.into());
    }
    validate_stop(&config.stop)?;
    config.line_search.validate().map_err(SolverError::Config)?;
    let start = Instant::now();
    let f = problem.objective();
    let bounds = problem.bounds();
    let separable = f.is_separable();
    let mut x = x0.to_vec();
    let mut cache = f.build_cache(&x);
    let mut grad: Vec<f64> = (0..n).map(|i| f.cached_partial(&cache, &x, i)).collect();
    let mut partial_evals = n as u64;
    let mut pair_updates = 0u64;
    let stride = config.record_stride.max(1);
    let mut trace = RunTrace::new("mvp");

    let record = |k: usize, obj: f64, sel: Option<(usize, usize, f64)>, grad: &[f64], pe: u64, pu: u64| OuterRecord {
        k,
        objective: obj,
        kkt_residual: sel.map(|s| s.2.max(0.0)),
        g_min: sel.map_or(f64::INFINITY, |s| grad[s.0]),
        g_max: sel.map_or(f64::NEG_INFINITY, |s| grad[s.1]),
        partial_evals: pe,
        pair_updates: pu,
        j: None,
        elapsed_secs: start.elapsed().as_secs_f64(),
    };

    let mut status = RunStatus::MaxOuter;
    let mut k = 0usize;
    loop {
        let objective = f.cached_value(&cache, &x);
        let selected = mvp_select(bounds, &x, &grad);
        let violation = selected.map(|s| s.2);
        let mut done = false;
        if !objective.is_finite() {
            status = RunStatus::NumericalFailure(FailureKind::NonFinite);
            done = true;
        } else if problem.is_singleton() || violation.is_none_or(|v| v <= 0.0) {
            status = RunStatus::Converged;
            done = true;
        } else {
            match config.stop {
                BaselineStop::Target { .. } if config.stop.reached_target(objective) => {
                    status = RunStatus::Converged;
                    done = true;
                }
                BaselineStop::Stationarity { epsilon } if violation.is_some_and(|v| v <= epsilon) => {
                    status = RunStatus::Converged;
                    done = true;
                }
                _ => {}
            }
        }
        if done || k >= config.max_iterations {
            trace.records.push(record(k, objective, selected, &grad, partial_evals, pair_updates));
            break;
        }
        if k % stride == 0 {
            trace.records.push(record(k, objective, selected, &grad, partial_evals, pair_updates));
        }
        let (i, j, _) = selected.expect("checked above");
        let step = match take_pair_step(problem, &mut cache, &mut x, i, j, &config.line_search) {
            Ok(s) => s,
            Err(kind) => {
                status = RunStatus::NumericalFailure(kind);
                trace.records.push(record(k, objective, selected, &grad, partial_evals, pair_updates));
                break;
            }
        };
        partial_evals += u64::from(step.partial_evals);
        k += 1;
        if k % CACHE_REFRESH == 0 {
            cache = f.build_cache(&x);
        }
        if step.moved != 0.0 {
            pair_updates += 1;
            if separable {
                grad[i] = f.cached_partial(&cache, &x, i);
                grad[j] = f.cached_partial(&cache, &x, j);
                partial_evals += 2;
            } else {
                for (h, gh) in grad.iter_mut().enumerate() {
                    *gh = f.cached_partial(&cache, &x, h);
                }
                partial_evals += n as u64;
            }
        } else {
            // A zero step on a violating pair cannot make progress again.
            status = RunStatus::NumericalFailure(FailureKind::NoStepBound);
            trace.records.push(record(k, f.cached_value(&cache, &x), selected, &grad, partial_evals, pair_updates));
            break;
        }
    }
    trace.status = status;
    Ok(BaselineOutput { x, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::StepsizeRule;
    use crate::suite::{ColumnMatrix, StructuredQuadratic};

    fn half_norm(n: usize) -> Problem<StructuredQuadratic> {
        let mut eye = vec![0.0; n * n];
        for i in 0..n {
            eye[i * n + i] = 1.0;
        }
        let f = StructuredQuadratic::new(ColumnMatrix::dense(n, n, eye), None, vec![0.0; n]);
        Problem::new(f, 1.0, Bounds::nonnegative(n)).unwrap()
    }

    #[test]
    fn selects_pair_on_simplex_vertex() {
        let b = Bounds::nonnegative(3);
        let x = [1.0, 0.0, 0.0];
        assert_eq!(mvp_select(&b, &x, &x), Some((1, 0, 1.0)));
    }

    #[test]
    fn first_iteration_moves_mass_to_second_coordinate() {
        let prob = half_norm(3);
        let x0 = prob.check_feasible(&[1.0, 0.0, 0.0]).unwrap();
        let cfg = MvpConfig {
            stop: BaselineStop::Stationarity { epsilon: 1e-12 },
            line_search: StepsizeRule::exact(),
            max_iterations: 1,
            record_stride: 1,
        };
        let out = run_mvp(&prob, &x0, &cfg).unwrap();
        // φ(t) = ½(1−t)² + ½t², minimized at t = ½.
        assert!((out.x[0] - 0.5).abs() < 1e-10 && (out.x[1] - 0.5).abs() < 1e-10);
        assert_eq!(out.x[2], 0.0);
    }

    #[test]
    fn converges_on_simplex() {
        let prob = half_norm(5);
        let x0 = prob.check_feasible(&[0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let cfg = MvpConfig {
            stop: BaselineStop::Target { f_target: 0.1, nu: 1e-9 },
            line_search: StepsizeRule::exact(),
            max_iterations: 1000,
            record_stride: 1,
        };
        let out = run_mvp(&prob, &x0, &cfg).unwrap();
        assert!(out.trace.status.is_converged());
        assert!((out.trace.final_objective() - 0.1).abs() < 1e-9);
    }
}
