//! Problem structure shared by every solver: the objective oracle, the
//! equality level `b`, and the bound vectors `l`, `u`.
//!
//! Feasible set: `{x : Σ x_i = b, l_i ≤ x_i ≤ u_i}` with `l_i < u_i` and
//! possibly infinite bounds.

use thiserror::Error;

use crate::extended::ExtReal;

/// Absolute slack on the bounds when validating points.
pub const BOUND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid bounds at coordinate {index}: lower {lower} must be < upper {upper}")]
    InvalidBounds { index: usize, lower: ExtReal, upper: ExtReal },
    #[error("equality constraint violated: sum {sum} differs from level {level} by more than {tol}")]
    InfeasibleEquality { sum: f64, level: f64, tol: f64 },
    #[error("coordinate {index} = {value} lies outside [{lower}, {upper}]")]
    BoundViolation { index: usize, value: f64, lower: ExtReal, upper: ExtReal },
    #[error("no coordinate is strictly {0}")]
    EmptyIndexSet(&'static str),
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
}

/// Lower and upper bounds, one pair per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<ExtReal>,
    upper: Vec<ExtReal>,
}

impl Bounds {
    pub fn new(lower: Vec<ExtReal>, upper: Vec<ExtReal>) -> Result<Self, ProblemError> {
        if lower.len() != upper.len() {
            return Err(ProblemError::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        for (index, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !(l < u) || l == ExtReal::PosInf || u == ExtReal::NegInf {
                return Err(ProblemError::InvalidBounds { index, lower: l, upper: u });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Builds bounds from IEEE floats, mapping `±inf` to the tagged variants.
    pub fn from_f64(lower: &[f64], upper: &[f64]) -> Result<Self, ProblemError> {
        let conv = |v: &[f64]| -> Result<Vec<ExtReal>, ProblemError> {
            v.iter()
                .enumerate()
                .map(|(i, &x)| ExtReal::from_f64(x).ok_or(ProblemError::NonFinite(i)))
                .collect()
        };
        Self::new(conv(lower)?, conv(upper)?)
    }

    /// `x_i ≥ 0` with no upper bound: the unit simplex once `Σ x_i = 1`.
    pub fn nonnegative(n: usize) -> Self {
        Self { lower: vec![ExtReal::ZERO; n], upper: vec![ExtReal::PosInf; n] }
    }

    pub fn free(n: usize) -> Self {
        Self { lower: vec![ExtReal::NegInf; n], upper: vec![ExtReal::PosInf; n] }
    }

    pub fn uniform_box(n: usize, lower: f64, upper: f64) -> Result<Self, ProblemError> {
        Self::new(vec![ExtReal::from(lower); n], vec![ExtReal::from(upper); n])
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self, i: usize) -> ExtReal {
        self.lower[i]
    }

    pub fn upper(&self, i: usize) -> ExtReal {
        self.upper[i]
    }

    pub fn lowers(&self) -> &[ExtReal] {
        &self.lower
    }

    pub fn uppers(&self) -> &[ExtReal] {
        &self.upper
    }

    /// `x_i − l_i`.
    #[inline]
    pub fn gap_to_lower(&self, i: usize, x: f64) -> ExtReal {
        self.lower[i].subtracted_from(x)
    }

    /// `u_i − x_i`.
    #[inline]
    pub fn gap_to_upper(&self, i: usize, x: f64) -> ExtReal {
        self.upper[i].minus(x)
    }

    /// `x_i < u_i`: coordinate may still increase.
    #[inline]
    pub fn below_upper(&self, i: usize, x: f64) -> bool {
        self.upper[i].gt_f64(x)
    }

    /// `x_i > l_i`: coordinate may still decrease.
    #[inline]
    pub fn above_lower(&self, i: usize, x: f64) -> bool {
        self.lower[i].lt_f64(x)
    }

    /// Projects `x` onto `[l_i, u_i]` when it overshoots by less than `slack`.
    /// Returns `None` when the overshoot is larger.
    pub fn repair(&self, i: usize, x: f64, slack: f64) -> Option<f64> {
        if let ExtReal::Finite(l) = self.lower[i] {
            if x < l {
                return (l - x < slack).then_some(l);
            }
        }
        if let ExtReal::Finite(u) = self.upper[i] {
            if x > u {
                return (x - u < slack).then_some(u);
            }
        }
        Some(x)
    }
}

/// Distance of `x_h` from its nearest bound, `min{x_h − l_h, u_h − x_h}`.
pub fn nearest_bound_distance(bounds: &Bounds, x: &[f64], h: usize) -> ExtReal {
    bounds.gap_to_lower(h, x[h]).min(bounds.gap_to_upper(h, x[h]))
}

/// Stationarity violation `max(0, max_{x_i>l_i} ∇_i f − min_{x_i<u_i} ∇_i f)`.
///
/// Zero exactly when a multiplier `λ` exists with `∇_i f ≥ λ` at lower bounds,
/// `= λ` in the interior and `≤ λ` at upper bounds.
pub fn kkt_residual(bounds: &Bounds, x: &[f64], grad: &[f64]) -> Result<f64, ProblemError> {
    let (g_min, g_max) = violation_extremes(bounds, x, grad);
    let g_min = g_min.ok_or(ProblemError::EmptyIndexSet("below its upper bound"))?;
    let g_max = g_max.ok_or(ProblemError::EmptyIndexSet("above its lower bound"))?;
    Ok((g_max - g_min).max(0.0))
}

/// `(min_{x_i<u_i} ∇_i f, max_{x_i>l_i} ∇_i f)`, `None` for an empty index set.
pub fn violation_extremes(bounds: &Bounds, x: &[f64], grad: &[f64]) -> (Option<f64>, Option<f64>) {
    let mut g_min: Option<f64> = None;
    let mut g_max: Option<f64> = None;
    for (i, (&xi, &gi)) in x.iter().zip(grad).enumerate() {
        if bounds.below_upper(i, xi) {
            g_min = Some(g_min.map_or(gi, |m| m.min(gi)));
        }
        if bounds.above_lower(i, xi) {
            g_max = Some(g_max.map_or(gi, |m| m.max(gi)));
        }
    }
    (g_min, g_max)
}

/// A continuously differentiable objective exposed per coordinate.
///
/// The `Cache` is per-run mutable state (for structured quadratics, the
/// residual vector) that makes partial derivatives cheap. The objective itself
/// is immutable and may be shared by concurrent runs; each run owns its cache.
pub trait Objective: Send + Sync {
    type Cache: Clone + Send;

    fn dim(&self) -> usize;

    fn build_cache(&self, x: &[f64]) -> Self::Cache;

    fn cached_value(&self, cache: &Self::Cache, x: &[f64]) -> f64;

    fn cached_partial(&self, cache: &Self::Cache, x: &[f64], i: usize) -> f64;

    /// `f(x + t(e_i − e_j)) − f(x)`.
    fn cached_pair_delta(&self, cache: &Self::Cache, x: &[f64], i: usize, j: usize, t: f64) -> f64;

    /// `d/dt f(x + t(e_i − e_j))`.
    fn cached_pair_slope(&self, cache: &Self::Cache, x: &[f64], i: usize, j: usize, t: f64) -> f64;

    /// Updates the cache for the move `x ← x + t(e_i − e_j)`; `x` is the
    /// point before the move.
    fn apply_pair_move(&self, cache: &mut Self::Cache, x: &[f64], i: usize, j: usize, t: f64);

    /// Positive constant `L̄_{i,j}` bounding the curvature of
    /// `t ↦ f(x + t(e_i − e_j))`, when known.
    fn pair_lipschitz(&self, _i: usize, _j: usize) -> Option<f64> {
        None
    }

    /// Lipschitz constant of `∇_i f` along `e_i`, when known.
    fn coordinate_lipschitz(&self, _i: usize) -> Option<f64> {
        None
    }

    /// Exact signed curvature `(e_i − e_j)ᵀ∇²f(e_i − e_j)` for quadratic objectives.
    fn pair_curvature(&self, _i: usize, _j: usize) -> Option<f64> {
        None
    }

    /// Whether a pair move only changes `∇_i f` and `∇_j f`.
    fn is_separable(&self) -> bool {
        false
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.cached_value(&self.build_cache(x), x)
    }

    fn partial(&self, i: usize, x: &[f64]) -> f64 {
        self.cached_partial(&self.build_cache(x), x, i)
    }

    /// `f(x + t(e_i − e_j))`, evaluated at the moved point from scratch.
    fn pair_move_value(&self, x: &[f64], i: usize, j: usize, t: f64) -> f64 {
        let mut moved = x.to_vec();
        moved[i] += t;
        moved[j] -= t;
        self.value(&moved)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let cache = self.build_cache(x);
        (0..self.dim()).map(|i| self.cached_partial(&cache, x, i)).collect()
    }
}

/// A point certified feasible for a particular problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePoint(Vec<f64>);

impl FeasiblePoint {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for FeasiblePoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `min f(x)` s.t. `Σ x_i = level`, `bounds`.
#[derive(Debug, Clone)]
pub struct Problem<O> {
    objective: O,
    level: f64,
    bounds: Bounds,
}

impl<O: Objective> Problem<O> {
    pub fn new(objective: O, level: f64, bounds: Bounds) -> Result<Self, ProblemError> {
        if objective.dim() != bounds.len() {
            return Err(ProblemError::DimensionMismatch { expected: objective.dim(), got: bounds.len() });
        }
        Ok(Self { objective, level, bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn objective(&self) -> &O {
        &self.objective
    }

    /// Absolute tolerance on `|Σ x_i − b|`.
    pub fn feasibility_tol(&self) -> f64 {
        1e-9 * (1.0 + self.level.abs())
    }

    /// Accepts `p` unchanged when feasible within tolerances. Never repairs
    /// the equality constraint.
    pub fn check_feasible(&self, p: &[f64]) -> Result<FeasiblePoint, ProblemError> {
        if p.len() != self.dim() {
            return Err(ProblemError::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        if let Some(i) = p.iter().position(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite(i));
        }
        let sum: f64 = p.iter().sum();
        let tol = self.feasibility_tol();
        if (sum - self.level).abs() > tol {
            return Err(ProblemError::InfeasibleEquality { sum, level: self.level, tol });
        }
        for (index, &value) in p.iter().enumerate() {
            let (lower, upper) = (self.bounds.lower(index), self.bounds.upper(index));
            if lower.gt_f64(value + BOUND_TOL) || upper.lt_f64(value - BOUND_TOL) {
                return Err(ProblemError::BoundViolation { index, value, lower, upper });
            }
        }
        Ok(FeasiblePoint(p.to_vec()))
    }

    /// True when the feasible set is a single point: `n = 1`, or the level is
    /// pinned to `Σ l_i` or `Σ u_i`.
    pub fn is_singleton(&self) -> bool {
        if self.dim() <= 1 {
            return true;
        }
        let tol = self.feasibility_tol();
        let pinned = |bs: &[ExtReal]| -> bool {
            let mut sum = 0.0;
            for b in bs {
                match b.finite() {
                    Some(v) => sum += v,
                    None => return false,
                }
            }
            (sum - self.level).abs() <= tol
        };
        pinned(self.bounds.lowers()) || pinned(self.bounds.uppers())
    }

    pub fn kkt_residual(&self, x: &[f64]) -> Result<f64, ProblemError> {
        let grad = self.objective.gradient(x);
        kkt_residual(&self.bounds, x, &grad)
    }
}
