use super::VerifyError;
use crate::problem::{FeasiblePoint, Objective, Problem};
use crate::solver::{solve, Ac2cdConfig, IndexRule, StepsizeRule};
use crate::suite::SeparableLogExp;

/// Outer iterations used for the fitted contraction.
pub const TAIL_WINDOW: usize = 50;

const ORACLE_TOL: f64 = 1e-14;
const ORACLE_MAX_ITER: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Fitted contraction `Ĉ = exp(slope)` of `log(f(x^k) − f*)` against `k`.
    pub c_fit: Option<f64>,
    pub c_bound: Option<f64>,
    /// Number of gaps the fit used.
    pub window: usize,
    /// Root mean square residual of the log-linear fit.
    pub fit_residual: f64,
    /// Consecutive pairs tested against `c_bound`.
    pub checked: usize,
    pub violations: usize,
    /// Largest observed `gap_{k+1} / gap_k`.
    pub max_ratio: f64,
    pub f_star: f64,
    /// Stabilized index (asymptotic check only).
    pub stable_index: Option<usize>,
    pub interior: Option<bool>,
}

impl RateReport {
    pub fn bound_holds(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }
}

/// Least-squares fit of `log gap_k ≈ a + k log Ĉ`. Needs at least two positive
/// gaps; returns `(Ĉ, rms residual)`.
pub fn fit_contraction(gaps: &[f64]) -> Option<(f64, f64)> {
    if gaps.len() < 2 || gaps.iter().any(|&g| !(g > 0.0)) {
        return None;
    }
    let n = gaps.len() as f64;
    let logs: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let kbar = (n - 1.0) / 2.0;
    let lbar = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, l) in logs.iter().enumerate() {
        let dk = k as f64 - kbar;
        sxy += dk * (l - lbar);
        sxx += dk * dk;
    }
    let slope = sxy / sxx;
    let rss: f64 = logs.iter().enumerate().map(|(k, l)| (l - lbar - slope * (k as f64 - kbar)).powi(2)).sum();
    Some((slope.exp(), (rss / n).sqrt()))
}

/// Solves `f_i′(x) = λ` for one term by safeguarded Newton inside the bracket
/// implied by `σ ∈ (0, 1)`.
fn term_root(f: &SeparableLogExp, i: usize, lambda: f64) -> f64 {
    let (a, b, c) = (f.a()[i], f.b()[i], f.c()[i]);
    let mut lo = c + (lambda - b.max(0.0)) / a;
    let mut hi = c + (lambda - b.min(0.0)) / a;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..ORACLE_MAX_ITER {
        let r = f.term_derivative(i, x) - lambda;
        if r == 0.0 {
            return x;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - r / f.term_second_derivative(i, x);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= ORACLE_TOL * (1.0 + x.abs()) || hi - lo <= ORACLE_TOL * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Minimizer and optimal value of `Σ f_i(x_i)` subject to `Σ x_i = level`
/// from the multiplier equation `Σ x_i(λ) = level`.
pub fn logexp_optimum(f: &SeparableLogExp, level: f64) -> Result<(Vec<f64>, f64), VerifyError> {
    let n = f.dim();
    let inv_a: f64 = f.a().iter().map(|a| 1.0 / a).sum();
    let base: f64 = level - f.c().iter().sum::<f64>();
    let shift = |pick: fn(f64) -> f64| (0..n).map(|i| pick(f.b()[i]) / f.a()[i]).sum::<f64>();
    let mut lo = (base + shift(|b| b.min(0.0))) / inv_a;
    let mut hi = (base + shift(|b| b.max(0.0))) / inv_a;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(VerifyError::OptimumUnavailable("non-finite multiplier bracket".into()));
    }
    let roots = |lambda: f64| -> Vec<f64> { (0..n).map(|i| term_root(f, i, lambda)).collect() };
    let mut lambda = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..ORACLE_MAX_ITER {
        let x = roots(lambda);
        let h = x.iter().sum::<f64>() - level;
        if h.abs() <= ORACLE_TOL * (1.0 + level.abs() + x.iter().map(|v| v.abs()).sum::<f64>()) {
            converged = true;
            break;
        }
        if h > 0.0 {
            hi = lambda;
        } else {
            lo = lambda;
        }
        let slope: f64 = (0..n).map(|i| 1.0 / f.term_second_derivative(i, x[i])).sum();
        let newton = lambda - h / slope;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= ORACLE_TOL * (1.0 + lambda.abs()) || next == lambda {
            lambda = next;
            converged = true;
            break;
        }
        lambda = next;
    }
    if !converged {
        return Err(VerifyError::OptimumUnavailable("multiplier iteration did not converge".into()));
    }
    let x = roots(lambda);
    let value = (0..n).map(|i| f.term(i, x[i])).sum();
    Ok((x, value))
}

/// Contraction constant for a fixed index `j̄` with pair constants
/// `L_i + L_j̄` and `μ = min a_i`:
///
/// ```text
/// C = 1 − μ / (2 L̄max [1 + (n−1)(Σ_{i≠j̄} L_{i,j̄})² / L̄min²])
/// ```
pub fn rate_constant(f: &SeparableLogExp, jbar: usize) -> f64 {
    let l = f.lipschitz();
    let pairs: Vec<f64> = (0..l.len()).filter(|&i| i != jbar).map(|i| l[i] + l[jbar]).collect();
    let sum: f64 = pairs.iter().sum();
    let lmin = pairs.iter().copied().fold(f64::INFINITY, f64::min);
    let lmax = pairs.iter().copied().fold(0.0, f64::max);
    let n = l.len() as f64;
    1.0 - f.strong_convexity() / (2.0 * lmax * (1.0 + (n - 1.0) * sum * sum / (lmin * lmin)))
}

/// Gaps above this floor are trusted against rounding in `f` and `f*`.
pub fn gap_floor(f_star: f64) -> f64 {
    1e-10 * (1.0 + f_star.abs())
}

fn tail_fit(gaps: &[f64], from: usize) -> (Option<f64>, usize, f64) {
    let usable: Vec<f64> = gaps[from..].iter().copied().take_while(|&g| g > 0.0).collect();
    let start = usable.len().saturating_sub(TAIL_WINDOW);
    match fit_contraction(&usable[start..]) {
        Some((c, res)) => (Some(c), usable.len() - start, res),
        None => (None, usable.len() - start, f64::NAN),
    }
}

/// Runs the solver with `j(k) = j̄` and `γ = ½` Lipschitz steps and tests
/// `f(x^{k+1}) − f* ≤ C (f(x^k) − f*)` for every outer iteration until the gap
/// drops below [`gap_floor`].
pub fn rate_bound_check(
    problem: &Problem<SeparableLogExp>,
    x0: &FeasiblePoint,
    jbar: usize,
    seed: u64,
    max_outer: usize,
) -> Result<RateReport, VerifyError> {
    let f = problem.objective();
    let (_, f_star) = logexp_optimum(f, problem.level())?;
    let c_bound = rate_constant(f, jbar);
    let floor = gap_floor(f_star);
    let config = Ac2cdConfig {
        index_rule: IndexRule::Fixed(jbar),
        stepsize: StepsizeRule::Lipschitz { gamma: 0.5 },
        epsilon: f64::MIN_POSITIVE,
        max_outer,
        rng_seed: seed,
        ..Ac2cdConfig::default()
    };
    let out = solve(problem, x0, &config).map_err(VerifyError::Solver)?;
    let gaps: Vec<f64> = out.trace.records.iter().map(|r| r.objective - f_star).collect();
    let cut = gaps.iter().position(|&g| g <= floor).map_or(gaps.len(), |p| p + 1);
    let gaps = &gaps[..cut];
    let (mut checked, mut violations, mut max_ratio) = (0, 0, 0.0f64);
    for w in gaps.windows(2) {
        checked += 1;
        if w[1] > c_bound * w[0] {
            violations += 1;
        }
        max_ratio = max_ratio.max(w[1] / w[0]);
    }
    let fit_gaps: Vec<f64> = gaps.iter().copied().filter(|&g| g > floor).collect();
    let (c_fit, window, fit_residual) = tail_fit(&fit_gaps, 0);
    Ok(RateReport {
        c_fit,
        c_bound: Some(c_bound),
        window,
        fit_residual,
        checked,
        violations,
        max_ratio,
        f_star,
        stable_index: None,
        interior: None,
    })
}

/// Runs the rate-mode index rule with exact line search, taking `f*` from a
/// longer run at tolerance `1e-12`, and reports whether `j(k)` settles, whether
/// the settled coordinate is interior, and the tail contraction.
pub fn asymptotic_rate_check<O: Objective>(
    problem: &Problem<O>,
    x0: &FeasiblePoint,
    seed: u64,
    max_outer: usize,
) -> Result<RateReport, VerifyError> {
    let base = Ac2cdConfig {
        index_rule: IndexRule::RateMode,
        stepsize: StepsizeRule::exact(),
        rng_seed: seed,
        ..Ac2cdConfig::default()
    };
    let reference = Ac2cdConfig { epsilon: 1e-12, max_outer: 4 * max_outer, ..base.clone() };
    let reference = solve(problem, x0, &reference).map_err(VerifyError::Solver)?;
    if !reference.trace.status.is_converged() {
        return Err(VerifyError::OptimumUnavailable(format!("reference run ended with {}", reference.trace.status)));
    }
    let f_star = reference.trace.final_objective();
    let floor = 1e-13 * (1.0 + f_star.abs());
    let run = Ac2cdConfig { epsilon: 1e-10, max_outer, ..base };
    let out = solve(problem, x0, &run).map_err(VerifyError::Solver)?;
    let records = &out.trace.records[1..];
    let js: Vec<usize> = records.iter().filter_map(|r| r.j).collect();
    let settled_from = js.iter().rposition(|&j| Some(&j) != js.last()).map_or(0, |p| p + 1);
    let stable = !js.is_empty() && js.len() - settled_from >= (js.len() / 2).max(1);
    let stable_index = if stable { js.last().copied() } else { None };
    let interior = stable_index.map(|j| {
        let b = problem.bounds();
        b.above_lower(j, out.x[j]) && b.below_upper(j, out.x[j])
    });
    let gaps: Vec<f64> = records.iter().map(|r| r.objective - f_star).filter(|&g| g > floor).collect();
    let from = settled_from.min(gaps.len());
    let (c_fit, window, fit_residual) = tail_fit(&gaps, from);
    Ok(RateReport {
        c_fit,
        c_bound: None,
        window,
        fit_residual,
        checked: 0,
        violations: 0,
        max_ratio: f64::NAN,
        f_star,
        stable_index,
        interior,
    })
}
