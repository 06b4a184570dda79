//! Stepsize rules along `d = g(e_p − e_j)`.
//!
//! Every rule returns `α ∈ [0, ᾱ]`; the coordinates then move by `t = αg`.
//! Along `d` the directional derivative is `∇f(z)ᵀd = −g²`.

use crate::extended::ExtReal;
use crate::problem::Bounds;

use super::FailureKind;

/// Backtracking cap for Armijo.
pub const MAX_BACKTRACKS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeRule {
    /// `α = δ^c Δ`, `Δ = min{ᾱ, A}` with the constant trial `A = a_upper`.
    Armijo { delta: f64, gamma: f64, a_lower: f64, a_upper: f64 },
    /// `α = min{ᾱ, 2(1−γ)/L̄_{p,j}}` with constants supplied by the objective.
    Lipschitz { gamma: f64 },
    /// Exact step `min{ᾱ, 1/κ}` for quadratics, `min{ᾱ, A_u}` when `κ ≤ 0`.
    Quadratic { a_upper: f64 },
    /// Minimizes `φ(α) = f(z + αd)` over `[0, ᾱ]`.
    Exact { tol: f64, max_evals: usize },
}

impl StepsizeRule {
    pub const fn armijo() -> Self {
        StepsizeRule::Armijo { delta: 0.5, gamma: 0.1, a_lower: 1.0, a_upper: 1.0 }
    }

    pub const fn lipschitz() -> Self {
        StepsizeRule::Lipschitz { gamma: 0.5 }
    }

    pub const fn quadratic() -> Self {
        StepsizeRule::Quadratic { a_upper: 1e12 }
    }

    pub const fn exact() -> Self {
        StepsizeRule::Exact { tol: 1e-10, max_evals: 200 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepsizeRule::Armijo { .. } => "armijo",
            StepsizeRule::Lipschitz { .. } => "lipschitz",
            StepsizeRule::Quadratic { .. } => "quadratic",
            StepsizeRule::Exact { .. } => "exact",
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        match *self {
            StepsizeRule::Armijo { delta, gamma, a_lower, a_upper } => {
                if !unit(delta) || !unit(gamma) {
                    return Err("armijo delta and gamma must lie in (0,1)".into());
                }
                if !(a_lower > 0.0 && a_lower <= a_upper && a_upper.is_finite()) {
                    return Err("armijo requires 0 < a_lower <= a_upper < inf".into());
                }
            }
            StepsizeRule::Lipschitz { gamma } if !unit(gamma) => {
                return Err("lipschitz gamma must lie in (0,1)".into());
            }
            StepsizeRule::Quadratic { a_upper } if !(a_upper > 0.0 && a_upper.is_finite()) => {
                return Err("quadratic a_upper must be positive and finite".into());
            }
            StepsizeRule::Exact { tol, max_evals } if !(tol > 0.0) || max_evals == 0 => {
                return Err("exact line search needs tol > 0 and max_evals > 0".into());
            }
            _ => {}
        }
        Ok(())
    }
}

impl Default for StepsizeRule {
    fn default() -> Self {
        StepsizeRule::armijo()
    }
}

/// Largest `α` keeping `z + α g (e_p − e_j)` inside the bounds.
///
/// `g > 0` raises `z_p` and lowers `z_j`; `g < 0` does the opposite; `g = 0`
/// gives zero by convention.
pub fn max_feasible_stepsize(bounds: &Bounds, z: &[f64], p: usize, j: usize, g: f64) -> ExtReal {
    let clip = |e: ExtReal| e.max(ExtReal::ZERO);
    if g > 0.0 {
        clip(bounds.gap_to_upper(p, z[p]).min(bounds.gap_to_lower(j, z[j]))).scale(1.0 / g)
    } else if g < 0.0 {
        clip(bounds.gap_to_lower(p, z[p]).min(bounds.gap_to_upper(j, z[j]))).scale(1.0 / -g)
    } else {
        ExtReal::ZERO
    }
}

/// Armijo backtracking. `decrease(α)` returns `f(z + αd) − f(z)`.
///
/// `resolution` is the smallest displacement `|αg|` that changes the moved
/// coordinates; backtracking below it returns a null step.
///
/// Returns `(α, trial evaluations)`.
pub fn armijo_stepsize(
    mut decrease: impl FnMut(f64) -> f64,
    g: f64,
    alpha_max: ExtReal,
    delta: f64,
    gamma: f64,
    trial: f64,
    resolution: f64,
) -> Result<(f64, usize), FailureKind> {
    let base = match alpha_max {
        ExtReal::Finite(a) => a.min(trial),
        _ => trial,
    };
    if base <= 0.0 || g == 0.0 {
        return Ok((0.0, 0));
    }
    let g2 = g * g;
    let mut alpha = base;
    for c in 0..=MAX_BACKTRACKS {
        let df = decrease(alpha);
        if df.is_nan() {
            return Err(FailureKind::NonFinite);
        }
        if df <= -gamma * alpha * g2 {
            return Ok((alpha, c as usize + 1));
        }
        alpha *= delta;
        if alpha * g.abs() < resolution {
            return Ok((0.0, c as usize + 1));
        }
    }
    Err(FailureKind::BacktrackOverflow)
}

/// `min{ᾱ, 2(1−γ)/L̄}`. A zero constant means the pair function is linear, so
/// the step runs to the boundary.
pub fn lipschitz_stepsize(alpha_max: ExtReal, gamma: f64, lbar: f64) -> Result<f64, FailureKind> {
    if alpha_max == ExtReal::ZERO {
        return Ok(0.0);
    }
    if lbar > 0.0 {
        Ok(alpha_max.min(ExtReal::Finite(2.0 * (1.0 - gamma) / lbar)).to_f64())
    } else {
        alpha_max.finite().ok_or(FailureKind::NoStepBound)
    }
}

/// `κ > 0`: `min{ᾱ, 1/κ}`; otherwise `min{ᾱ, A_u}`.
pub fn quadratic_stepsize(alpha_max: ExtReal, kappa: f64, a_upper: f64) -> f64 {
    let cap = if kappa > 0.0 { 1.0 / kappa } else { a_upper };
    alpha_max.min(ExtReal::Finite(cap)).to_f64()
}

/// Minimizes `φ` over `[0, ᾱ]` from its derivative `φ'`, with `φ'(0) = slope0 < 0`.
///
/// A sign-change bracket is located first (grown geometrically when `ᾱ = ∞`),
/// then shrunk by regula falsi with the Illinois modification. Stops when
/// `|φ'(α)| ≤ tol·(1 + |φ'(0)|)`. Returns `(α, derivative evaluations)`.
pub fn exact_line_search(
    mut phi_prime: impl FnMut(f64) -> f64,
    slope0: f64,
    alpha_max: ExtReal,
    tol: f64,
    max_evals: usize,
) -> Result<(f64, usize), FailureKind> {
    if alpha_max == ExtReal::ZERO || slope0 >= 0.0 {
        return Ok((0.0, 0));
    }
    let stop = tol * (1.0 + slope0.abs());
    let mut evals = 0usize;
    let mut eval = |a: f64, evals: &mut usize| -> Result<f64, FailureKind> {
        if *evals >= max_evals {
            return Err(FailureKind::MaxEvalsExceeded);
        }
        *evals += 1;
        let v = phi_prime(a);
        if v.is_nan() {
            Err(FailureKind::NonFinite)
        } else {
            Ok(v)
        }
    };

    let (mut lo, mut flo) = (0.0, slope0);
    let (mut hi, mut fhi);
    match alpha_max {
        ExtReal::Finite(a) => {
            hi = a;
            fhi = eval(hi, &mut evals)?;
            if fhi <= 0.0 {
                return Ok((a, evals));
            }
        }
        _ => {
            hi = 1.0;
            loop {
                fhi = eval(hi, &mut evals)?;
                if fhi > 0.0 {
                    break;
                }
                if fhi.abs() <= stop {
                    return Ok((hi, evals));
                }
                lo = hi;
                flo = fhi;
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(FailureKind::NoStepBound);
                }
            }
        }
    }

    // Invariant: flo < 0 < fhi.
    let mut side = 0i8;
    loop {
        let mut a = (lo * fhi - hi * flo) / (fhi - flo);
        if !(a > lo && a < hi) {
            a = 0.5 * (lo + hi);
        }
        let fa = eval(a, &mut evals)?;
        if fa.abs() <= stop || hi - lo <= f64::EPSILON * hi {
            return Ok((a, evals));
        }
        if fa < 0.0 {
            lo = a;
            flo = fa;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = a;
            fhi = fa;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
}
