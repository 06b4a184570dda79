use rand::distr::Open01;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ColumnMatrix, Family, GeneratedInstance, InstanceObjective, SeparableLogExp, StructuredQuadratic};
use crate::problem::{Bounds, Problem};

/// Coefficient ranges of the separable log-exp family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogExpRegime {
    /// `a ∈ (0,15)`, `b, c, d ∈ (−15,15)`.
    Wide,
    /// `a ∈ (0,2)`, `b ∈ (−2,2)`, `c, d ∈ (−10,10)`.
    Narrow,
}

impl LogExpRegime {
    pub fn index(self) -> u8 {
        match self {
            LogExpRegime::Wide => 1,
            LogExpRegime::Narrow => 2,
        }
    }

    pub fn from_index(k: u8) -> Option<Self> {
        match k {
            1 => Some(LogExpRegime::Wide),
            2 => Some(LogExpRegime::Narrow),
            _ => None,
        }
    }
}

fn open_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.sample::<f64, _>(Open01)
}

fn simplex_instance(
    family: Family,
    seed: u64,
    q: ColumnMatrix,
    diag: Option<Vec<f64>>,
    linear: Vec<f64>,
) -> GeneratedInstance {
    let (n, m) = (q.cols(), q.rows());
    let objective = InstanceObjective::Quadratic(StructuredQuadratic::new(q, diag, linear));
    let problem = Problem::new(objective, 1.0, Bounds::nonnegative(n)).expect("dimensions agree by construction");
    GeneratedInstance { family, seed, n, m, problem, reference_optimum: None, labels: None, diag_signs: None }
}

/// Minimum enclosing ball of the given points, as a quadratic over the unit
/// simplex: `f(x) = ‖Σ x_i vⁱ‖² − Σ ‖vⁱ‖² x_i`, whose optimal value is minus
/// the squared radius.
pub fn chebyshev_from_points(points: &[Vec<f64>], seed: u64) -> GeneratedInstance {
    let n = points.len();
    assert!(n >= 1, "need at least one point");
    let m = points[0].len();
    assert!(points.iter().all(|p| p.len() == m), "points must share one dimension");
    let scale = std::f64::consts::SQRT_2;
    let data = points.iter().flat_map(|p| p.iter().map(move |v| scale * v)).collect();
    let linear = points.iter().map(|p| p.iter().map(|v| v * v).sum()).collect();
    simplex_instance(Family::Chebyshev, seed, ColumnMatrix::dense(m, n, data), None, linear)
}

/// `n` standard normal points in `ℝ^m`.
pub fn gen_chebyshev(n: usize, m: usize, seed: u64) -> GeneratedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> =
        (0..n).map(|_| (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
    chebyshev_from_points(&points, seed)
}

/// `½ xᵀQᵀDQx − qᵀx` on the simplex with `⌈neg_fraction·m⌉` entries of `D`
/// drawn from `(−1,0)` and the rest equal to one.
pub fn gen_nonconvex(n: usize, m: usize, neg_fraction: f64, seed: u64) -> GeneratedInstance {
    assert!((0.0..=1.0).contains(&neg_fraction), "neg_fraction must lie in [0,1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let linear: Vec<f64> = (0..n).map(|_| rng.sample(Open01)).collect();
    let n_neg = ((neg_fraction * m as f64).ceil() as usize).min(m);
    let mut rows: Vec<usize> = (0..m).collect();
    rows.shuffle(&mut rng);
    let mut diag = vec![1.0; m];
    for &r in &rows[..n_neg] {
        diag[r] = open_uniform(&mut rng, -1.0, 0.0);
    }
    let mut inst = simplex_instance(Family::Nonconvex, seed, ColumnMatrix::dense(m, n, data), Some(diag), linear);
    inst.diag_signs = Some((n_neg, m - n_neg));
    inst
}

/// Wraps explicit log-exp coefficients as an instance over `Σx = 0` with no bounds.
pub fn logexp_instance(objective: SeparableLogExp, seed: u64) -> GeneratedInstance {
    let n = crate::problem::Objective::dim(&objective);
    let problem = Problem::new(InstanceObjective::LogExp(objective), 0.0, Bounds::free(n))
        .expect("dimensions agree by construction");
    GeneratedInstance {
        family: Family::LogExp,
        seed,
        n,
        m: 0,
        problem,
        reference_optimum: None,
        labels: None,
        diag_signs: None,
    }
}

pub fn gen_logexp(n: usize, seed: u64, regime: LogExpRegime) -> GeneratedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ra, rb, rcd) = match regime {
        LogExpRegime::Wide => (15.0, 15.0, 15.0),
        LogExpRegime::Narrow => (2.0, 2.0, 10.0),
    };
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for _ in 0..n {
        a.push(open_uniform(&mut rng, 0.0, ra));
        b.push(open_uniform(&mut rng, -rb, rb));
        c.push(open_uniform(&mut rng, -rcd, rcd));
        d.push(open_uniform(&mut rng, -rcd, rcd));
    }
    logexp_instance(SeparableLogExp::new(a, b, c, d), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Objective;

    #[test]
    fn regeneration_is_identical() {
        let a = gen_nonconvex(12, 7, 0.3, 99);
        let b = gen_nonconvex(12, 7, 0.3, 99);
        assert_eq!(a.problem.objective(), b.problem.objective());
        let c = gen_logexp(9, 4, LogExpRegime::Wide);
        let d = gen_logexp(9, 4, LogExpRegime::Wide);
        assert_eq!(c.problem.objective(), d.problem.objective());
    }

    #[test]
    fn nonconvex_negative_count() {
        let inst = gen_nonconvex(5, 4, 0.5, 1);
        assert_eq!(inst.diag_signs, Some((2, 2)));
        let diag = inst.problem.objective().as_quadratic().unwrap().diag().unwrap().to_vec();
        assert_eq!(diag.iter().filter(|&&v| v < 0.0).count(), 2);
        assert!(diag.iter().all(|&v| v == 1.0 || (-1.0 < v && v < 0.0)));
    }

    #[test]
    fn chebyshev_toy_objective() {
        let inst = chebyshev_from_points(&[vec![0.0], vec![2.0]], 0);
        let f = inst.problem.objective();
        // f = 4x₂² − 4x₂ on the simplex.
        for &x2 in &[0.0, 0.25, 0.5, 1.0] {
            let v = f.value(&[1.0 - x2, x2]);
            assert!((v - (4.0 * x2 * x2 - 4.0 * x2)).abs() < 1e-14);
        }
    }

    #[test]
    fn logexp_ranges() {
        let inst = gen_logexp(200, 3, LogExpRegime::Narrow);
        let f = inst.problem.objective().as_logexp().unwrap();
        assert!(f.a().iter().all(|&v| v > 0.0 && v < 2.0));
        assert!(f.b().iter().all(|&v| v.abs() < 2.0));
        assert!(f.c().iter().chain(f.d()).all(|&v| v.abs() < 10.0));
    }
}
