//! Runs the methods of a configuration over its starting points.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use ac2cd_core::baselines::{default_rcd_stepsize, run_mvp, run_rcd, BaselineStop, MvpConfig, RcdConfig, SamplerMode};
use ac2cd_core::suite::GeneratedInstance;
use ac2cd_core::{solve, Ac2cdConfig, RunTrace, StepsizeRule};

use crate::config::{ExperimentConfig, MethodKind, MethodSpec};
use crate::summary::SummaryRow;
use crate::CliError;

/// One finished run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub method: MethodKind,
    pub rep: usize,
    pub start_seed: u64,
    pub trace: RunTrace,
    /// AC2CD objective the baselines were measured against (convex families).
    pub f_target: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub family: ac2cd_core::suite::Family,
    /// Ordered by repetition, then by method as listed.
    pub runs: Vec<RunResult>,
}

impl ExperimentOutput {
    pub fn summary(&self) -> Vec<SummaryRow> {
        SummaryRow::table(&self.runs)
    }
}

/// Number of worker threads: `AC2CD_THREADS` when set, else the machine's
/// parallelism.
pub fn thread_limit() -> usize {
    std::env::var("AC2CD_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// AC2CD settings for `spec`: the family's protocol defaults overridden by
/// the method entry and the stop policy.
pub fn ac2cd_config(
    inst: &GeneratedInstance,
    spec: &MethodSpec,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Ac2cdConfig, CliError> {
    let mut c = inst.protocol_config();
    if let Some(rule) = spec.index_rule(c.index_rule)? {
        c.index_rule = rule;
    }
    if let Some(s) = spec.stepsize {
        c.stepsize = s.rule(spec.gamma);
    } else if let (Some(g), StepsizeRule::Lipschitz { .. }) = (spec.gamma, c.stepsize) {
        c.stepsize = StepsizeRule::Lipschitz { gamma: g };
    }
    if let Some(tau) = spec.tau {
        c.tau = tau;
    }
    c.epsilon = cfg.stop.epsilon;
    c.max_outer = spec.max_outer.unwrap_or(cfg.stop.max_outer);
    c.rng_seed = seed;
    c.validate(inst.n)?;
    Ok(c)
}

fn baseline_stop(cfg: &ExperimentConfig, f_target: Option<f64>) -> BaselineStop {
    match f_target {
        Some(f_target) => BaselineStop::Target { f_target, nu: cfg.stop.nu },
        None => BaselineStop::Stationarity { epsilon: cfg.stop.epsilon },
    }
}

/// Runs every method from one starting point. AC2CD goes first; on convex
/// families its final objective becomes the baselines' target. Without AC2CD
/// in the list, or on the non-convex family, each baseline stops on its own
/// residual criterion at `ε`.
pub fn run_repetition(
    inst: &GeneratedInstance,
    cfg: &ExperimentConfig,
    rep: usize,
    seed: u64,
) -> Result<Vec<RunResult>, CliError> {
    let x0 = inst.problem.check_feasible(&inst.starting_point(seed))?;
    let n = inst.n;
    let mut order: Vec<&MethodSpec> = cfg.methods.iter().collect();
    order.sort_by_key(|m| m.name != MethodKind::Ac2cd);
    let mut f_target = None;
    let mut runs = Vec::with_capacity(order.len());
    for spec in order {
        let trace = match spec.name {
            MethodKind::Ac2cd => {
                let out = solve(&inst.problem, &x0, &ac2cd_config(inst, spec, cfg, seed)?)?;
                if inst.family.is_convex() {
                    f_target = Some(out.trace.final_objective());
                }
                out.trace
            }
            MethodKind::RcdUnif | MethodKind::RcdLips => {
                let rc = RcdConfig {
                    sampler: if spec.name == MethodKind::RcdUnif {
                        SamplerMode::Uniform
                    } else {
                        SamplerMode::LipschitzWeighted
                    },
                    stepsize: match spec.stepsize {
                        Some(s) => s.rule(spec.gamma),
                        None => default_rcd_stepsize(inst.problem.objective()),
                    },
                    stop: baseline_stop(cfg, f_target),
                    max_outer: spec.max_outer.unwrap_or((cfg.stop.inner_budget / n).max(1)),
                    rng_seed: seed,
                    refresh_interval: 1000,
                };
                run_rcd(&inst.problem, &x0, &rc)?.trace
            }
            MethodKind::Mvp => {
                let mc = MvpConfig {
                    stop: baseline_stop(cfg, f_target),
                    line_search: spec.stepsize.map_or(StepsizeRule::exact(), |s| s.rule(spec.gamma)),
                    max_iterations: spec.max_outer.map_or(cfg.stop.inner_budget, |k| k * n),
                    record_stride: n,
                };
                run_mvp(&inst.problem, &x0, &mc)?.trace
            }
        };
        let target = if spec.name == MethodKind::Ac2cd { None } else { f_target };
        runs.push(RunResult { method: spec.name, rep, start_seed: seed, trace, f_target: target });
    }
    // Report in the configured method order.
    runs.sort_by_key(|r| cfg.methods.iter().position(|m| m.name == r.method));
    Ok(runs)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    run_experiment_with_threads(cfg, thread_limit())
}

/// Repetitions run on up to `threads` workers; results are collected on the
/// calling thread and put back in repetition order.
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutput, CliError> {
    cfg.validate()?;
    let inst = cfg.build_instance()?;
    let seeds = cfg.repetitions.seed_list();
    let workers = threads.clamp(1, seeds.len());
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    let mut slots: Vec<Option<Vec<RunResult>>> = vec![None; seeds.len()];
    let mut first_err = None;
    thread::scope(|s| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, seeds, inst) = (&next, &seeds, &inst);
            s.spawn(move || loop {
                let r = next.fetch_add(1, Ordering::Relaxed);
                if r >= seeds.len() {
                    break;
                }
                let res = run_repetition(inst, cfg, r, seeds[r]);
                let failed = res.is_err();
                if tx.send((r, res)).is_err() || failed {
                    // Stop handing out work after a failure.
                    next.store(seeds.len(), Ordering::Relaxed);
                    break;
                }
            });
        }
        drop(tx);
        for (r, res) in rx {
            match res {
                Ok(runs) => slots[r] = Some(runs),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
    });
    if let Some(e) = first_err {
        return Err(e);
    }
    let runs = slots.into_iter().flat_map(|s| s.expect("every repetition reported")).collect();
    Ok(ExperimentOutput { family: inst.family, runs })
}
