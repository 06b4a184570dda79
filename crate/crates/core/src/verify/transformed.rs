use nalgebra::{DMatrix, DVector};

use super::VerifyError;
use crate::problem::{FeasiblePoint, Objective, Problem};
use crate::solver::{solve_with_observer, Ac2cdConfig, IndexRule, StepsizeRule};

/// The problem in the `n − 1` free coordinates obtained by eliminating
/// `x_j̄ = b − Σ_{i≠j̄} x_i`:
///
/// ```text
/// x = M y + w,   ψ(y) = f(M y + w)
/// ```
///
/// `M` is the identity with a row of −1 inserted at `j̄`, and `w = b·e_j̄`.
#[derive(Debug, Clone)]
pub struct TransformedProblem<'a, O> {
    problem: &'a Problem<O>,
    jbar: usize,
    m: DMatrix<f64>,
    w: DVector<f64>,
}

impl<'a, O: Objective> TransformedProblem<'a, O> {
    pub fn new(problem: &'a Problem<O>, jbar: usize) -> Result<Self, VerifyError> {
        let n = problem.dim();
        if n < 2 || jbar >= n {
            return Err(VerifyError::Setup(format!("index {jbar} is not eliminable at n = {n}")));
        }
        let mut m = DMatrix::zeros(n, n - 1);
        for c in 0..n - 1 {
            m[(Self::x_index(jbar, c), c)] = 1.0;
            m[(jbar, c)] = -1.0;
        }
        let mut w = DVector::zeros(n);
        w[jbar] = problem.level();
        Ok(Self { problem, jbar, m, w })
    }

    pub fn jbar(&self) -> usize {
        self.jbar
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.w
    }

    /// Ambient index of `y_c`.
    pub fn x_index(jbar: usize, c: usize) -> usize {
        if c < jbar {
            c
        } else {
            c + 1
        }
    }

    /// Position of `x_i` in `y`; `None` for `j̄`.
    pub fn y_index(&self, i: usize) -> Option<usize> {
        match i.cmp(&self.jbar) {
            std::cmp::Ordering::Less => Some(i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i - 1),
        }
    }

    pub fn to_x(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.m * y + &self.w
    }

    pub fn to_y(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(x.len() - 1, x.iter().enumerate().filter(|&(i, _)| i != self.jbar).map(|(_, &v)| v))
    }

    pub fn psi(&self, y: &DVector<f64>) -> f64 {
        self.problem.objective().value(self.to_x(y).as_slice())
    }

    /// `∇ψ(y) = Mᵀ ∇f(My + w)`.
    pub fn grad_psi(&self, y: &DVector<f64>) -> DVector<f64> {
        let grad = DVector::from_vec(self.problem.objective().gradient(self.to_x(y).as_slice()));
        self.m.transpose() * grad
    }

    /// Second difference of `ψ` along `e_c` with step `h`.
    pub fn coordinate_curvature(&self, y: &DVector<f64>, c: usize, h: f64) -> f64 {
        let mut up = y.clone();
        up[c] += h;
        let mut down = y.clone();
        down[c] -= h;
        (self.psi(&up) - 2.0 * self.psi(y) + self.psi(&down)) / (h * h)
    }
}

/// Runs the almost cyclic solver with `j(k) = j̄` and `γ = ½` Lipschitz steps
/// next to cyclic coordinate descent `y_c ← y_c − ∇_c ψ(y) / L̄_{p,j̄}` on the
/// transformed problem, visiting coordinates in the order the solver used.
///
/// Returns the largest `|z_h − (My + w)_h|` over all inner iterates.
pub fn trajectory_equivalence<O: Objective>(
    problem: &Problem<O>,
    x0: &FeasiblePoint,
    jbar: usize,
    sweeps: usize,
    seed: u64,
) -> Result<f64, VerifyError> {
    if problem.bounds().lowers().iter().chain(problem.bounds().uppers()).any(|b| b.is_finite()) {
        return Err(VerifyError::Setup("trajectory check needs an unbounded problem".into()));
    }
    let tp = TransformedProblem::new(problem, jbar)?;
    let mut y = tp.to_y(x0);
    let mut deviation = (tp.to_x(&y) - DVector::from_column_slice(x0)).amax();
    let config = Ac2cdConfig {
        index_rule: IndexRule::Fixed(jbar),
        stepsize: StepsizeRule::Lipschitz { gamma: 0.5 },
        epsilon: f64::MIN_POSITIVE,
        max_outer: sweeps,
        rng_seed: seed,
        ..Ac2cdConfig::default()
    };
    let mut missing = None;
    let mut observer = |rec: &crate::solver::InnerStepRecord, z: &[f64]| {
        if let Some(c) = tp.y_index(rec.p) {
            match problem.objective().pair_lipschitz(rec.p, jbar) {
                Some(l) if l > 0.0 => {
                    let grad = tp.grad_psi(&y);
                    y[c] -= grad[c] / l;
                }
                _ => missing = Some(rec.p),
            }
        }
        let x = tp.to_x(&y);
        let dev = x.iter().zip(z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        deviation = deviation.max(dev);
    };
    solve_with_observer(problem, x0, &config, &mut observer).map_err(VerifyError::Solver)?;
    if let Some(p) = missing {
        return Err(VerifyError::Setup(format!("no positive pair Lipschitz constant for ({p}, {jbar})")));
    }
    Ok(deviation)
}
