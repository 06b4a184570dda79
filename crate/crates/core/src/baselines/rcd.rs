use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{validate_stop, BaselineOutput, BaselineStop, PairSampler, RcdConfig, SamplerMode};
use crate::problem::{kkt_residual, FeasiblePoint, Objective, Problem, ProblemError};
use crate::solver::{check_termination, take_pair_step, FailureKind, OuterRecord, RunStatus, RunTrace, SolverError};

fn full_kkt<O: Objective>(problem: &Problem<O>, cache: &O::Cache, x: &[f64]) -> Option<f64> {
    let f = problem.objective();
    let grad: Vec<f64> = (0..problem.dim()).map(|i| f.cached_partial(cache, x, i)).collect();
    kkt_residual(problem.bounds(), x, &grad).ok()
}

fn sampler_for<O: Objective>(problem: &Problem<O>, mode: SamplerMode) -> Result<PairSampler, SolverError> {
    let n = problem.dim();
    match mode {
        SamplerMode::Uniform => Ok(PairSampler::uniform(n)),
        SamplerMode::LipschitzWeighted => {
            let l: Option<Vec<f64>> = (0..n).map(|i| problem.objective().coordinate_lipschitz(i)).collect();
            let l = l.ok_or_else(|| SolverError::Config("weighted sampling needs coordinate Lipschitz constants".into()))?;
            PairSampler::lipschitz_weighted(&l).map_err(SolverError::Config)
        }
    }
}

/// Random 2-coordinate descent. One outer iteration is `n` sampled pairs.
///
/// With a stationarity stop the run uses the same `G_min/G_max` test and final
/// full-gradient check as the almost cyclic solver.
pub fn run_rcd<O: Objective>(
    problem: &Problem<O>,
    x0: &FeasiblePoint,
    config: &RcdConfig,
) -> Result<BaselineOutput, SolverError> {
    let n = problem.dim();
    if x0.len() != n {
        return Err(ProblemError::DimensionMismatch { expected: n, got: x0.len() }.into());
    }
    validate_stop(&config.stop)?;
    config.stepsize.validate().map_err(SolverError::Config)?;
    let start = Instant::now();
    let f = problem.objective();
    let mut x = x0.to_vec();
    let mut cache = f.build_cache(&x);
    let mut trace = RunTrace::new(match config.sampler {
        SamplerMode::Uniform => "rcd_unif",
        SamplerMode::LipschitzWeighted => "rcd_lips",
    });
    let f0 = f.cached_value(&cache, &x);
    trace.records.push(OuterRecord {
        k: 0,
        objective: f0,
        kkt_residual: full_kkt(problem, &cache, &x),
        g_min: f64::INFINITY,
        g_max: f64::NEG_INFINITY,
        partial_evals: 0,
        pair_updates: 0,
        j: None,
        elapsed_secs: start.elapsed().as_secs_f64(),
    });
    if problem.is_singleton() || config.stop.reached_target(f0) {
        trace.status = RunStatus::Converged;
        return Ok(BaselineOutput { x, trace });
    }
    let sampler = sampler_for(problem, config.sampler)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let bounds = problem.bounds();
    let (mut partial_evals, mut pair_updates) = (0u64, 0u64);
    let mut status = RunStatus::MaxOuter;
    for k in 0..config.max_outer {
        let (mut g_min, mut g_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut failure = None;
        for _ in 0..n {
            let (i, j) = sampler.sample(&mut rng);
            let (xi, xj) = (x[i], x[j]);
            match take_pair_step(problem, &mut cache, &mut x, i, j, &config.stepsize) {
                Ok(step) => {
                    partial_evals += u64::from(step.partial_evals);
                    if step.moved != 0.0 {
                        pair_updates += 1;
                    }
                    if step.partial_evals > 0 {
                        for (h, xh, gh) in [(i, xi, step.grad_p), (j, xj, step.grad_j)] {
                            if bounds.below_upper(h, xh) {
                                g_min = g_min.min(gh);
                            }
                            if bounds.above_lower(h, xh) {
                                g_max = g_max.max(gh);
                            }
                        }
                    }
                }
                Err(kind) => {
                    failure = Some(kind);
                    break;
                }
            }
        }
        if (k + 1) % config.refresh_interval.max(1) == 0 {
            cache = f.build_cache(&x);
        }
        let objective = f.cached_value(&cache, &x);
        let mut kkt = None;
        let mut done = true;
        if let Some(kind) = failure {
            status = RunStatus::NumericalFailure(kind);
        } else if !objective.is_finite() {
            status = RunStatus::NumericalFailure(FailureKind::NonFinite);
        } else {
            match config.stop {
                BaselineStop::Target { .. } if config.stop.reached_target(objective) => status = RunStatus::Converged,
                BaselineStop::Stationarity { epsilon } if check_termination(g_min, g_max, epsilon) => {
                    kkt = full_kkt(problem, &cache, &x);
                    partial_evals += n as u64;
                    if kkt.is_some_and(|r| r <= epsilon) {
                        status = RunStatus::Converged;
                    } else {
                        done = false;
                    }
                }
                _ => done = false,
            }
        }
        trace.records.push(OuterRecord {
            k: k + 1,
            objective,
            kkt_residual: kkt,
            g_min,
            g_max,
            partial_evals,
            pair_updates,
            j: None,
            elapsed_secs: start.elapsed().as_secs_f64(),
        });
        if done {
            break;
        }
    }
    let last = trace.records.last_mut().expect("starting record present");
    if last.kkt_residual.is_none() {
        last.kkt_residual = full_kkt(problem, &cache, &x);
    }
    trace.status = status;
    Ok(BaselineOutput { x, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::default_rcd_stepsize;
    use crate::problem::Bounds;
    use crate::suite::{ColumnMatrix, StructuredQuadratic};

    fn half_norm(n: usize) -> Problem<StructuredQuadratic> {
        let mut eye = vec![0.0; n * n];
        for i in 0..n {
            eye[i * n + i] = 1.0;
        }
        let f = StructuredQuadratic::new(ColumnMatrix::dense(n, n, eye), None, vec![0.0; n]);
        Problem::new(f, 1.0, Bounds::nonnegative(n)).unwrap()
    }

    fn config(stop: BaselineStop) -> RcdConfig {
        RcdConfig {
            sampler: SamplerMode::Uniform,
            stepsize: default_rcd_stepsize(half_norm(3).objective()),
            stop,
            max_outer: 10_000,
            rng_seed: 5,
            refresh_interval: 1000,
        }
    }

    #[test]
    fn target_equal_to_start_stops_immediately() {
        let prob = half_norm(3);
        let x0 = prob.check_feasible(&[1.0, 0.0, 0.0]).unwrap();
        let out = run_rcd(&prob, &x0, &config(BaselineStop::Target { f_target: 0.5, nu: 1e-6 })).unwrap();
        assert_eq!(out.trace.outer_iterations(), 0);
        assert!(out.trace.status.is_converged());
    }

    #[test]
    fn reaches_simplex_target() {
        let prob = half_norm(3);
        let x0 = prob.check_feasible(&[1.0, 0.0, 0.0]).unwrap();
        let out = run_rcd(&prob, &x0, &config(BaselineStop::Target { f_target: 1.0 / 6.0, nu: 1e-6 })).unwrap();
        assert!(out.trace.status.is_converged());
        let objs: Vec<f64> = out.trace.records.iter().map(|r| r.objective).collect();
        assert!(objs.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn stationarity_stop() {
        let prob = half_norm(4);
        let x0 = prob.check_feasible(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        let out = run_rcd(&prob, &x0, &config(BaselineStop::Stationarity { epsilon: 1e-6 })).unwrap();
        assert!(out.trace.status.is_converged());
        assert!(out.trace.final_kkt().unwrap() <= 1e-6);
    }
}
