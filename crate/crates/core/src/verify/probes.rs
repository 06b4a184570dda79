//! Randomized probes shared by the test suites and the command line checks.

use rand::Rng;

use super::{brute_force_line_search, finite_diff_gradient};
use crate::extended::ExtReal;
use crate::problem::{Objective, Problem};
use crate::solver::{compute_stepsize, max_feasible_stepsize, take_pair_step, StepsizeRule};

/// Finite-difference step for gradient checks.
pub const FD_STEP: f64 = 1e-4;
/// Grid size of the brute-force line search.
pub const LINE_SEARCH_GRID: usize = 100_000;
/// Allowed rounding in the descent and sufficient-decrease contracts,
/// relative to `1 + |f(z)|`.
pub const CONTRACT_SLACK: f64 = 1e-12;

/// Random distinct pair.
pub fn random_pair<R: Rng>(n: usize, rng: &mut R) -> (usize, usize) {
    let p = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= p {
        j += 1;
    }
    (p, j)
}

/// A feasible point reached from `base` by `moves` random pair moves, each a
/// uniform fraction of the feasible range (capped at `spread` when unbounded).
pub fn random_feasible_point<O: Objective, R: Rng>(
    problem: &Problem<O>,
    base: &[f64],
    moves: usize,
    spread: f64,
    rng: &mut R,
) -> Vec<f64> {
    let n = problem.dim();
    let mut x = base.to_vec();
    if n < 2 {
        return x;
    }
    let b = problem.bounds();
    for _ in 0..moves {
        let (p, j) = random_pair(n, rng);
        // t > 0 raises x_p and lowers x_j.
        let up = b.gap_to_upper(p, x[p]).min(b.gap_to_lower(j, x[j])).to_f64().min(spread).max(0.0);
        let down = b.gap_to_lower(p, x[p]).min(b.gap_to_upper(j, x[j])).to_f64().min(spread).max(0.0);
        let t = rng.random_range(-down..=up) * 0.999;
        x[p] += t;
        x[j] -= t;
        for h in [p, j] {
            x[h] = x[h].max(b.lower(h).to_f64()).min(b.upper(h).to_f64());
        }
    }
    // Absorb rounding in the level into the coordinate with the most room.
    let drift = problem.level() - x.iter().sum::<f64>();
    if let Some(h) = (0..n).find(|&h| {
        let v = x[h] + drift;
        b.lower(h).to_f64() <= v && v <= b.upper(h).to_f64()
    }) {
        x[h] += drift;
    }
    x
}

/// Largest `|∂_i f − FD_i| / max(1, |FD_i|)` over the given points.
pub fn gradient_consistency<O: Objective>(objective: &O, points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|x| {
            let fd = finite_diff_gradient(objective, x, FD_STEP);
            let cache = objective.build_cache(x);
            (0..x.len())
                .map(|i| (objective.cached_partial(&cache, x, i) - fd[i]).abs() / fd[i].abs().max(1.0))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchProbe {
    pub exact: f64,
    pub brute: f64,
    /// Length of the scanned interval: `ᾱ`, or the bracket when `ᾱ = ∞`.
    pub scale: f64,
}

impl LineSearchProbe {
    pub fn normalized_gap(&self) -> f64 {
        (self.exact - self.brute).abs() / self.scale
    }
}

/// Compares the exact line search with the brute-force oracle along a random
/// pair at `z`. Returns `None` when the pair admits no move.
pub fn line_search_probe<O: Objective, R: Rng>(
    problem: &Problem<O>,
    z: &[f64],
    rng: &mut R,
) -> Option<LineSearchProbe> {
    let f = problem.objective();
    let (p, j) = random_pair(problem.dim(), rng);
    let cache = f.build_cache(z);
    let g = f.cached_partial(&cache, z, j) - f.cached_partial(&cache, z, p);
    let alpha_max = max_feasible_stepsize(problem.bounds(), z, p, j, g);
    if g == 0.0 || alpha_max == ExtReal::ZERO {
        return None;
    }
    let (exact, _) = compute_stepsize(f, &cache, z, p, j, g, alpha_max, &StepsizeRule::exact()).ok()?;
    let scale = match alpha_max {
        ExtReal::Finite(a) => a,
        _ => {
            let phi = |a: f64| f.cached_pair_delta(&cache, z, p, j, a * g);
            let mut a = 1.0;
            while phi(2.0 * a) < phi(a) && a < 1e12 {
                a *= 2.0;
            }
            2.0 * a
        }
    };
    let brute = brute_force_line_search(f, &cache, z, p, j, g, scale, LINE_SEARCH_GRID);
    Some(LineSearchProbe { exact, brute, scale })
}

/// Contracts of one inner step. The step is applied to `z`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepViolations {
    pub descent: bool,
    pub feasibility: bool,
    pub stepsize_range: bool,
    pub sufficient_decrease: bool,
}

impl StepViolations {
    pub fn any(&self) -> bool {
        self.descent || self.feasibility || self.stepsize_range || self.sufficient_decrease
    }
}

/// Takes one step along `(p, j)` under `rule` and checks descent, feasibility,
/// `0 ≤ α ≤ ᾱ` and, for Armijo, `f(z⁺) ≤ f(z) − γ/(2A_u)·‖z⁺ − z‖²`.
pub fn check_step_contracts<O: Objective>(
    problem: &Problem<O>,
    z: &mut Vec<f64>,
    p: usize,
    j: usize,
    rule: &StepsizeRule,
) -> Result<StepViolations, String> {
    let f = problem.objective();
    let before = z.clone();
    let mut cache = f.build_cache(z);
    let f0 = f.cached_value(&cache, z);
    let step = take_pair_step(problem, &mut cache, z, p, j, rule).map_err(|e| format!("{e:?}"))?;
    let slack = CONTRACT_SLACK * (1.0 + f0.abs());
    let moved = z[p] - before[p];
    let decrease = f.cached_pair_delta(&f.build_cache(&before), &before, p, j, moved);
    let mut v = StepViolations::default();
    v.descent = decrease > slack;
    v.feasibility = problem.check_feasible(z).is_err();
    v.stepsize_range = !(step.alpha >= 0.0 && ExtReal::Finite(step.alpha) <= step.alpha_max);
    if let StepsizeRule::Armijo { gamma, a_upper, .. } = *rule {
        let dist2 = (z[p] - before[p]).powi(2) + (z[j] - before[j]).powi(2);
        v.sufficient_decrease = decrease > -gamma / (2.0 * a_upper) * dist2 + slack;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Bounds;
    use crate::suite::{ColumnMatrix, StructuredQuadratic};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half_norm(n: usize) -> Problem<StructuredQuadratic> {
        let mut eye = vec![0.0; n * n];
        for i in 0..n {
            eye[i * n + i] = 1.0;
        }
        let f = StructuredQuadratic::new(ColumnMatrix::dense(n, n, eye), None, vec![0.0; n]);
        Problem::new(f, 1.0, Bounds::nonnegative(n)).unwrap()
    }

    #[test]
    fn random_points_stay_feasible() {
        let prob = half_norm(6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x = random_feasible_point(&prob, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 30, 1.0, &mut rng);
            assert!(prob.check_feasible(&x).is_ok(), "{x:?}");
        }
    }

    #[test]
    fn armijo_step_meets_contracts() {
        let prob = half_norm(2);
        let mut z = vec![0.8, 0.2];
        let v = check_step_contracts(&prob, &mut z, 0, 1, &StepsizeRule::armijo()).unwrap();
        assert!(!v.any(), "{v:?}");
        assert!(z[0] < 0.8);
    }
}
