//! Single pair steps and the inner sweep of one outer iteration.

use crate::extended::ExtReal;
use crate::problem::{Bounds, Objective, Problem};

use super::stepsize::{
    armijo_stepsize, exact_line_search, lipschitz_stepsize, max_feasible_stepsize, quadratic_stepsize, StepsizeRule,
};
use super::FailureKind;

/// Absolute overshoot repaired after a move.
pub const DRIFT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerStepRecord {
    pub outer: usize,
    pub inner: usize,
    pub p: usize,
    pub j: usize,
    pub g: f64,
    pub alpha: f64,
    pub alpha_max: ExtReal,
    pub skipped: bool,
}

/// Outcome of [`take_pair_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStep {
    /// `∇_j f − ∇_p f` at the pre-move point.
    pub g: f64,
    pub grad_p: f64,
    pub grad_j: f64,
    pub alpha: f64,
    pub alpha_max: ExtReal,
    /// Displacement `t` of `z_p` (and `−t` of `z_j`).
    pub moved: f64,
    /// Both coordinates pinned: nothing was evaluated.
    pub skipped: bool,
    pub partial_evals: u32,
    /// Function or derivative evaluations spent by the stepsize rule.
    pub trial_evals: usize,
}

impl PairStep {
    fn idle(skipped: bool) -> Self {
        PairStep {
            g: 0.0,
            grad_p: f64::NAN,
            grad_j: f64::NAN,
            alpha: 0.0,
            alpha_max: ExtReal::ZERO,
            moved: 0.0,
            skipped,
            partial_evals: 0,
            trial_evals: 0,
        }
    }
}

/// No feasible move exists in either direction along `e_p − e_j`.
pub fn pair_is_pinned(bounds: &Bounds, z: &[f64], p: usize, j: usize) -> bool {
    let blocked_neg = !bounds.above_lower(p, z[p]) || !bounds.below_upper(j, z[j]);
    let blocked_pos = !bounds.below_upper(p, z[p]) || !bounds.above_lower(j, z[j]);
    blocked_neg && blocked_pos
}

/// Stepsize `α` for the pair at `z` under `rule`, returning `(α, trial evaluations)`.
pub fn compute_stepsize<O: Objective>(
    objective: &O,
    cache: &O::Cache,
    z: &[f64],
    p: usize,
    j: usize,
    g: f64,
    alpha_max: ExtReal,
    rule: &StepsizeRule,
) -> Result<(f64, usize), FailureKind> {
    if g == 0.0 || alpha_max == ExtReal::ZERO {
        return Ok((0.0, 0));
    }
    match *rule {
        StepsizeRule::Armijo { delta, gamma, a_upper, .. } => armijo_stepsize(
            |a| objective.cached_pair_delta(cache, z, p, j, a * g),
            g,
            alpha_max,
            delta,
            gamma,
            a_upper,
            f64::EPSILON * z[p].abs().max(z[j].abs()).max(f64::MIN_POSITIVE),
        ),
        StepsizeRule::Lipschitz { gamma } => {
            let lbar = objective.pair_lipschitz(p, j).ok_or(FailureKind::NoStepBound)?;
            Ok((lipschitz_stepsize(alpha_max, gamma, lbar)?, 0))
        }
        StepsizeRule::Quadratic { a_upper } => {
            let kappa = objective.pair_curvature(p, j).ok_or(FailureKind::NoStepBound)?;
            Ok((quadratic_stepsize(alpha_max, kappa, a_upper), 0))
        }
        StepsizeRule::Exact { tol, max_evals } => exact_line_search(
            |a| g * objective.cached_pair_slope(cache, z, p, j, a * g),
            -g * g,
            alpha_max,
            tol,
            max_evals,
        ),
    }
}

/// Moves `z ← z + αg(e_p − e_j)` and updates the cache. A step reaching `ᾱ`
/// puts the blocking coordinate exactly on its bound. Returns the
/// displacement of `z_p`.
pub fn apply_step<O: Objective>(
    problem: &Problem<O>,
    cache: &mut O::Cache,
    z: &mut [f64],
    p: usize,
    j: usize,
    g: f64,
    alpha: f64,
    alpha_max: ExtReal,
) -> f64 {
    if alpha == 0.0 || g == 0.0 {
        return 0.0;
    }
    let bounds = problem.bounds();
    let at_max = matches!(alpha_max, ExtReal::Finite(a) if alpha >= a);
    let (mut new_p, mut new_j, t);
    if at_max {
        let (gap_p, gap_j) = if g > 0.0 {
            (bounds.gap_to_upper(p, z[p]), bounds.gap_to_lower(j, z[j]))
        } else {
            (bounds.gap_to_lower(p, z[p]), bounds.gap_to_upper(j, z[j]))
        };
        let sign = g.signum();
        if gap_p <= gap_j {
            let gap = gap_p.finite().expect("finite ᾱ has a finite blocking gap").max(0.0);
            t = sign * gap;
            new_p = if g > 0.0 { bounds.upper(p) } else { bounds.lower(p) }.to_f64();
            new_j = z[j] - t;
        } else {
            let gap = gap_j.finite().expect("finite ᾱ has a finite blocking gap").max(0.0);
            t = sign * gap;
            new_j = if g > 0.0 { bounds.lower(j) } else { bounds.upper(j) }.to_f64();
            new_p = z[p] + t;
        }
    } else {
        t = alpha * g;
        new_p = z[p] + t;
        new_j = z[j] - t;
    }
    new_p = bounds.repair(p, new_p, DRIFT_TOL).unwrap_or_else(|| clamp(bounds, p, new_p));
    new_j = bounds.repair(j, new_j, DRIFT_TOL).unwrap_or_else(|| clamp(bounds, j, new_j));
    problem.objective().apply_pair_move(cache, z, p, j, t);
    z[p] = new_p;
    z[j] = new_j;
    t
}

fn clamp(bounds: &Bounds, i: usize, x: f64) -> f64 {
    debug_assert!(false, "coordinate {i} overshot its bound by more than the drift tolerance");
    x.max(bounds.lower(i).to_f64()).min(bounds.upper(i).to_f64())
}

/// One pair update along `d = g(e_p − e_j)`, `g = ∇_j f − ∇_p f`.
///
/// Evaluates exactly two partial derivatives unless `p = j` or the pair is
/// pinned, in which case nothing is evaluated.
pub fn take_pair_step<O: Objective>(
    problem: &Problem<O>,
    cache: &mut O::Cache,
    z: &mut [f64],
    p: usize,
    j: usize,
    rule: &StepsizeRule,
) -> Result<PairStep, FailureKind> {
    if p == j {
        return Ok(PairStep::idle(false));
    }
    if pair_is_pinned(problem.bounds(), z, p, j) {
        return Ok(PairStep::idle(true));
    }
    let f = problem.objective();
    let grad_p = f.cached_partial(cache, z, p);
    let grad_j = f.cached_partial(cache, z, j);
    let g = grad_j - grad_p;
    if !g.is_finite() {
        return Err(FailureKind::NonFinite);
    }
    let alpha_max = max_feasible_stepsize(problem.bounds(), z, p, j, g);
    let (alpha, trial_evals) = compute_stepsize(f, cache, z, p, j, g, alpha_max, rule)?;
    let moved = apply_step(problem, cache, z, p, j, g, alpha, alpha_max);
    Ok(PairStep { g, grad_p, grad_j, alpha, alpha_max, moved, skipped: false, partial_evals: 2, trial_evals })
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct SolverState<C> {
    pub x: Vec<f64>,
    pub cache: C,
    pub j: usize,
    pub g_min: f64,
    pub g_max: f64,
    pub partial_evals: u64,
    pub pair_updates: u64,
}

impl<C> SolverState<C> {
    pub fn new<O: Objective<Cache = C>>(problem: &Problem<O>, x0: Vec<f64>, j: usize) -> Self {
        let cache = problem.objective().build_cache(&x0);
        Self { x: x0, cache, j, g_min: f64::INFINITY, g_max: f64::NEG_INFINITY, partial_evals: 0, pair_updates: 0 }
    }

    pub fn reset_extremes(&mut self) {
        self.g_min = f64::INFINITY;
        self.g_max = f64::NEG_INFINITY;
    }
}

/// Runs the inner iterations of outer iteration `k` in the order `perm`,
/// pairing each `p` with the fixed index `state.j`.
///
/// `observer` receives every inner record together with the post-step iterate.
pub fn run_inner_sweep<O: Objective>(
    problem: &Problem<O>,
    state: &mut SolverState<O::Cache>,
    k: usize,
    perm: &[usize],
    rule: &StepsizeRule,
    observer: &mut dyn FnMut(&InnerStepRecord, &[f64]),
) -> Result<(), FailureKind> {
    let j = state.j;
    let bounds = problem.bounds();
    for (inner, &p) in perm.iter().enumerate() {
        let zp = state.x[p];
        let zj = state.x[j];
        let step = take_pair_step(problem, &mut state.cache, &mut state.x, p, j, rule)?;
        if step.partial_evals > 0 {
            state.partial_evals += u64::from(step.partial_evals);
            for (h, zh, gh) in [(p, zp, step.grad_p), (j, zj, step.grad_j)] {
                if bounds.below_upper(h, zh) {
                    state.g_min = state.g_min.min(gh);
                }
                if bounds.above_lower(h, zh) {
                    state.g_max = state.g_max.max(gh);
                }
            }
        }
        if step.moved != 0.0 {
            state.pair_updates += 1;
        }
        let record = InnerStepRecord {
            outer: k,
            inner,
            p,
            j,
            g: step.g,
            alpha: step.alpha,
            alpha_max: step.alpha_max,
            skipped: step.skipped,
        };
        observer(&record, &state.x);
    }
    Ok(())
}

/// Stop signal `G_min − G_max ≥ −ε`; never fires before both extremes are seen.
pub fn check_termination(g_min: f64, g_max: f64, epsilon: f64) -> bool {
    g_min.is_finite() && g_max.is_finite() && g_min - g_max >= -epsilon
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::{ColumnMatrix, StructuredQuadratic};

    /// `½‖x‖²` on the unit simplex.
    fn half_norm(n: usize) -> Problem<StructuredQuadratic> {
        let mut eye = vec![0.0; n * n];
        for i in 0..n {
            eye[i * n + i] = 1.0;
        }
        let f = StructuredQuadratic::new(ColumnMatrix::dense(n, n, eye), None, vec![0.0; n]);
        Problem::new(f, 1.0, Bounds::nonnegative(n)).unwrap()
    }

    #[test]
    fn termination_examples() {
        assert!(check_termination(1.0, 1.05, 0.1));
        assert!(!check_termination(f64::INFINITY, 1.0, 0.1));
        assert!(!check_termination(1.0, 1.2, 0.1));
    }

    #[test]
    fn pinned_pair_costs_nothing() {
        let f = half_norm(3).objective().clone();
        let boxed = Problem::new(f, 1.0, Bounds::uniform_box(3, 0.0, 1.0).unwrap()).unwrap();
        let mut z = vec![1.0, 0.0, 0.0];
        let mut cache = boxed.objective().build_cache(&z);
        // Both coordinates on their lower bound: any move pushes one below zero.
        let step = take_pair_step(&boxed, &mut cache, &mut z, 1, 2, &StepsizeRule::quadratic()).unwrap();
        assert!(step.skipped);
        assert_eq!(step.partial_evals, 0);
        assert_eq!(z, vec![1.0, 0.0, 0.0]);
        let step = take_pair_step(&boxed, &mut cache, &mut z, 1, 0, &StepsizeRule::quadratic()).unwrap();
        assert!(!step.skipped);
        assert_eq!(step.partial_evals, 2);
    }

    #[test]
    fn one_sweep_decreases_objective() {
        let prob = half_norm(3);
        let mut state = SolverState::new(&prob, vec![1.0, 0.0, 0.0], 0);
        let f0 = prob.objective().value(&state.x);
        run_inner_sweep(&prob, &mut state, 0, &[0, 1, 2], &StepsizeRule::exact(), &mut |_, _| {}).unwrap();
        assert!(prob.objective().value(&state.x) < f0);
        assert!((state.x.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(state.partial_evals, 4);
    }

    #[test]
    fn n2_sweep_has_one_real_update() {
        let prob = half_norm(2);
        let mut state = SolverState::new(&prob, vec![0.3, 0.7], 1);
        let mut records = Vec::new();
        run_inner_sweep(&prob, &mut state, 0, &[0, 1], &StepsizeRule::quadratic(), &mut |r, _| records.push(*r))
            .unwrap();
        assert_eq!(state.pair_updates, 1);
        assert_eq!(records[1].alpha, 0.0);
        assert!((state.x[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn full_step_lands_exactly_on_bound() {
        let mut eye = vec![0.0; 4];
        eye[0] = 1.0;
        eye[3] = 1.0;
        let f = StructuredQuadratic::new(ColumnMatrix::dense(2, 2, eye), None, vec![0.0, 2.0]);
        let prob = Problem::new(f, 1.2, Bounds::uniform_box(2, 0.0, 1.0).unwrap()).unwrap();
        let mut z = vec![0.5, 0.7];
        let mut cache = prob.objective().build_cache(&z);
        // ∇ = (0.5, −1.3), g = 1.8; the unconstrained move 0.9 exceeds u_p − z_p = 0.3.
        let step = take_pair_step(&prob, &mut cache, &mut z, 1, 0, &StepsizeRule::quadratic()).unwrap();
        assert_eq!(step.alpha, step.alpha_max.to_f64());
        assert_eq!(z[1], 1.0);
        assert!((z[0] - 0.2).abs() < 1e-15);
        assert!(prob.objective().cache_drift(&cache, &z) < 1e-15);
    }
}
