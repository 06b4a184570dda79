use ac2cd_core::suite::{chebyshev_from_points, gen_logexp, ColumnMatrix, LogExpRegime, SeparableLogExp, StructuredQuadratic};
use ac2cd_core::verify::{
    asymptotic_rate_check, finite_diff_gradient, FD_STEP, rate_bound_check, rate_constant, trajectory_equivalence,
    TransformedProblem,
};
use ac2cd_core::{Bounds, Objective, Problem};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn logexp_problem(n: usize, seed: u64) -> Problem<SeparableLogExp> {
    let inst = gen_logexp(n, seed, LogExpRegime::Narrow);
    Problem::new(inst.problem.objective().as_logexp().unwrap().clone(), 0.0, Bounds::free(n)).unwrap()
}

#[test]
fn trajectories_agree_on_narrow_family() {
    for seed in 0..3 {
        let inst = gen_logexp(50, seed, LogExpRegime::Narrow);
        let x0 = inst.problem.check_feasible(&[0.0; 50]).unwrap();
        let dev = trajectory_equivalence(&inst.problem, &x0, 7, 10, seed).unwrap();
        assert!(dev <= 1e-9, "seed {seed}: {dev:e}");
    }
}

#[test]
fn symmetric_instance_is_stationary_after_one_sweep() {
    // Equal c, b = 0, zero start: already optimal, nothing moves.
    let n = 5;
    let f = SeparableLogExp::new(vec![1.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let prob = Problem::new(f, 0.0, Bounds::free(n)).unwrap();
    let x0 = prob.check_feasible(&[0.0; 5]).unwrap();
    assert_eq!(trajectory_equivalence(&prob, &x0, 2, 1, 0).unwrap(), 0.0);
}

#[test]
fn transformed_level_and_curvature() {
    let prob = logexp_problem(8, 3);
    let mu = prob.objective().strong_convexity();
    let tp = TransformedProblem::new(&prob, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let y = DVector::from_fn(7, |_, _| rng.random_range(-5.0..5.0));
        let x = tp.to_x(&y);
        assert!(x.sum().abs() <= 1e-12);
        for c in 0..7 {
            assert!(tp.coordinate_curvature(&y, c, 1e-3) >= mu * (1.0 - 1e-4));
        }
        let g = tp.grad_psi(&y);
        let fd = finite_diff_gradient(&PsiObjective(&tp), y.as_slice(), FD_STEP);
        for c in 0..7 {
            assert!((g[c] - fd[c]).abs() <= 1e-5 * g[c].abs().max(1.0));
        }
    }
}

/// ψ wrapped as an objective for the finite-difference oracle.
struct PsiObjective<'a, 'b>(&'a TransformedProblem<'b, SeparableLogExp>);

impl Objective for PsiObjective<'_, '_> {
    type Cache = ();
    fn dim(&self) -> usize {
        self.0.matrix().ncols()
    }
    fn build_cache(&self, _: &[f64]) {}
    fn cached_value(&self, _: &(), y: &[f64]) -> f64 {
        self.0.psi(&DVector::from_column_slice(y))
    }
    fn cached_partial(&self, _: &(), y: &[f64], i: usize) -> f64 {
        self.0.grad_psi(&DVector::from_column_slice(y))[i]
    }
    fn cached_pair_delta(&self, _: &(), _: &[f64], _: usize, _: usize, _: f64) -> f64 {
        unimplemented!()
    }
    fn cached_pair_slope(&self, _: &(), _: &[f64], _: usize, _: usize, _: f64) -> f64 {
        unimplemented!()
    }
    fn apply_pair_move(&self, _: &mut (), _: &[f64], _: usize, _: usize, _: f64) {}
}

#[test]
fn rate_bound_on_narrow_instances() {
    for seed in 0..4 {
        let prob = logexp_problem(30, seed);
        let x0 = prob.check_feasible(&[0.0; 30]).unwrap();
        let rep = rate_bound_check(&prob, &x0, 0, seed, 5000).unwrap();
        assert!(rep.bound_holds(), "{rep:?}");
        assert!(rep.c_fit.unwrap() < 1.0 && rep.c_fit.unwrap() <= rep.c_bound.unwrap());
    }
}

#[test]
fn rate_constant_two_symmetric_coordinates() {
    // L = (a + b²/4) = 2 each, pair constant 4, μ = 1:
    // C = 1 − 1/(2·4·(1 + 1·16/16)) = 15/16.
    let f = SeparableLogExp::new(vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, -1.0], vec![0.0, 0.0]);
    assert!((rate_constant(&f, 1) - 15.0 / 16.0).abs() < 1e-15);
    let prob = Problem::new(f, 0.0, Bounds::free(2)).unwrap();
    let x0 = prob.check_feasible(&[0.0, 0.0]).unwrap();
    let rep = rate_bound_check(&prob, &x0, 1, 0, 500).unwrap();
    assert!(rep.bound_holds(), "{rep:?}");
}

#[test]
fn asymptotic_check_on_simplex_half_norm() {
    let n = 5;
    let mut eye = vec![0.0; n * n];
    for i in 0..n {
        eye[i * n + i] = 1.0;
    }
    let prob =
        Problem::new(StructuredQuadratic::new(ColumnMatrix::dense(n, n, eye), None, vec![0.0; n]), 1.0, Bounds::nonnegative(n))
            .unwrap();
    let x0 = prob.check_feasible(&[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
    let rep = asymptotic_rate_check(&prob, &x0, 3, 500).unwrap();
    assert!(rep.stable_index.is_some(), "{rep:?}");
    assert_eq!(rep.interior, Some(true));
    assert!((rep.f_star - 0.1).abs() < 1e-12);
    if let Some(c) = rep.c_fit {
        assert!(c < 1.0);
    }
}

#[test]
fn asymptotic_check_on_collinear_chebyshev() {
    let inst = chebyshev_from_points(&[vec![0.0], vec![1.0], vec![2.0]], 0);
    let x0 = inst.problem.check_feasible(&[0.0, 0.0, 1.0]).unwrap();
    let rep = asymptotic_rate_check(&inst.problem, &x0, 0, 500).unwrap();
    assert!(rep.stable_index.is_some(), "{rep:?}");
}

#[test]
fn vertex_optimum_is_reported_not_fatal() {
    // Linear objective with a unique vertex minimizer: the iterate reaches a
    // point with every coordinate on a bound.
    let f = StructuredQuadratic::new(ColumnMatrix::dense(1, 3, vec![0.0; 3]), None, vec![3.0, 1.0, 2.0]);
    let prob = Problem::new(f, 1.0, Bounds::nonnegative(3)).unwrap();
    let x0 = prob.check_feasible(&[0.2, 0.5, 0.3]).unwrap();
    match asymptotic_rate_check(&prob, &x0, 0, 200) {
        Ok(rep) => assert!(rep.interior != Some(true) || rep.stable_index.is_none() || rep.c_fit.is_none(), "{rep:?}"),
        Err(e) => assert!(e.to_string().contains("optimum unavailable"), "{e}"),
    }
}
