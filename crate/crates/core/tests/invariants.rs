mod common;

use ac2cd_core::problem::{kkt_residual, nearest_bound_distance, Objective};
use ac2cd_core::solver::{solve_with_observer, Ac2cdConfig, IndexRule, StepsizeRule};
use ac2cd_core::suite::{
    gen_chebyshev, gen_logexp, gen_nonconvex, read_instance, write_instance, ColumnMatrix, GeneratedInstance,
    LogExpRegime, StructuredQuadratic,
};
use ac2cd_core::verify::{check_step_contracts, random_pair};
use ac2cd_core::{Bounds, ExtReal};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(kind: u8, seed: u64, n: usize) -> GeneratedInstance {
    match kind % 4 {
        0 => gen_chebyshev(n, 3, seed),
        1 => gen_logexp(n, seed, LogExpRegime::Wide),
        2 => gen_logexp(n, seed, LogExpRegime::Narrow),
        _ => gen_nonconvex(n, n, 0.5, seed),
    }
}

fn rules(inst: &GeneratedInstance) -> Vec<StepsizeRule> {
    let mut r = vec![StepsizeRule::armijo(), StepsizeRule::lipschitz(), StepsizeRule::exact()];
    if inst.problem.objective().as_quadratic().is_some() {
        r.push(StepsizeRule::quadratic());
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_iterates_feasible_and_monotone(kind in 0u8..4, seed in 0u64..1000, n in 2usize..12) {
        let inst = instance(kind, seed, n);
        let x0 = inst.problem.check_feasible(&inst.starting_point(seed)).unwrap();
        for rule in rules(&inst) {
            let f = inst.problem.objective();
            let mut last = f.value(&x0);
            let mut bad = Vec::new();
            let cfg = Ac2cdConfig { stepsize: rule, max_outer: 20, epsilon: 1e-8, rng_seed: seed, ..Default::default() };
            let mut observer = |_: &_, z: &[f64]| {
                if inst.problem.check_feasible(z).is_err() {
                    bad.push("feasibility");
                }
                let v = f.value(z);
                if v > last + 1e-12 * (1.0 + last.abs()) {
                    bad.push("monotone");
                }
                last = v;
            };
            let out = solve_with_observer(&inst.problem, &x0, &cfg, &mut observer).unwrap();
            prop_assert!(bad.is_empty(), "{} {}: {:?}", inst.family, rule.name(), bad);
            let objs: Vec<f64> = out.trace.records.iter().map(|r| r.objective).collect();
            prop_assert!(objs.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs())));
        }
    }

    #[test]
    fn step_contracts_hold(kind in 0u8..4, seed in 0u64..1000, n in 2usize..10) {
        let inst = instance(kind, seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for rule in rules(&inst) {
            let mut z = inst.starting_point(seed);
            for _ in 0..25 {
                let (p, j) = random_pair(n, &mut rng);
                let v = check_step_contracts(&inst.problem, &mut z, p, j, &rule).unwrap();
                prop_assert!(!v.any(), "{} {}: {:?}", inst.family, rule.name(), v);
            }
        }
    }

    #[test]
    fn direction_identity(kind in 0u8..4, seed in 0u64..1000, n in 2usize..10) {
        // ∇fᵀd with d = g(e_p − e_j) equals −g².
        let inst = instance(kind, seed, n);
        let f = inst.problem.objective();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let z = inst.starting_point(seed);
        let grad = f.gradient(&z);
        let (p, j) = random_pair(n, &mut rng);
        let g = grad[j] - grad[p];
        let dd = g * grad[p] - g * grad[j];
        prop_assert!((dd + g * g).abs() <= 1e-10 * (1.0 + g * g));
    }

    #[test]
    fn residual_shift_invariant(grad in prop::collection::vec(-10.0f64..10.0, 2..8), shift in -100.0f64..100.0, seed in 0u64..100) {
        let n = grad.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bounds = Bounds::uniform_box(n, 0.0, 1.0).unwrap();
        let x: Vec<f64> = (0..n).map(|_| [0.0, 0.5, 1.0][rng.random_range(0..3)]).collect();
        let shifted: Vec<f64> = grad.iter().map(|g| g + shift).collect();
        match (kkt_residual(&bounds, &x, &grad), kkt_residual(&bounds, &x, &shifted)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9 * (1.0 + shift.abs())),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn bound_distance_is_one_lipschitz(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let bounds = Bounds::uniform_box(1, 0.0, 1.0).unwrap();
        let da = nearest_bound_distance(&bounds, &[a], 0).to_f64();
        let db = nearest_bound_distance(&bounds, &[b], 0).to_f64();
        prop_assert!((da - db).abs() <= (a - b).abs() + 1e-15);
    }

    #[test]
    fn pair_moves_preserve_sum(x in prop::collection::vec(-1e3f64..1e3, 2..20), t in -1e3f64..1e3, seed in 0u64..100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (i, j) = random_pair(x.len(), &mut rng);
        let before: f64 = x.iter().sum();
        let mut y = x.clone();
        y[i] += t;
        y[j] -= t;
        let after: f64 = y.iter().sum();
        prop_assert!((before - after).abs() <= 1e-12 * x.iter().map(|v| v.abs()).sum::<f64>().max(t.abs()).max(1.0) * 4.0);
    }

    #[test]
    fn instance_files_round_trip(kind in 0u8..4, seed in 0u64..1000, n in 2usize..8) {
        let inst = instance(kind, seed, n);
        let back = read_instance(&write_instance(&inst)).unwrap();
        prop_assert_eq!(back.family, inst.family);
        prop_assert_eq!(back.problem.objective(), inst.problem.objective());
        prop_assert_eq!(back.problem.level(), inst.problem.level());
        prop_assert_eq!(back.problem.bounds(), inst.problem.bounds());
    }
}

#[test]
fn regeneration_is_bit_identical() {
    for kind in 0..4 {
        let a = instance(kind, 42, 9);
        let b = instance(kind, 42, 9);
        assert_eq!(write_instance(&a), write_instance(&b));
    }
}

#[test]
fn cache_single_move_matches_recompute() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data: Vec<f64> = (0..80).map(|_| rng.random_range(-1.0..1.0)).collect();
    let diag: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f = StructuredQuadratic::new(ColumnMatrix::dense(10, 8, data), Some(diag), vec![0.0; 8]);
    let mut x = vec![0.125; 8];
    let mut cache = f.build_cache(&x);
    f.apply_pair_move(&mut cache, &x, 2, 5, 0.3);
    x[2] += 0.3;
    x[5] -= 0.3;
    let fresh = f.build_cache(&x);
    let diff = cache.residual().iter().zip(fresh.residual()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-12, "{diff:e}");
}

#[test]
fn cache_drift_after_many_moves() {
    let inst = gen_nonconvex(40, 40, 0.5, 9);
    let f = inst.problem.objective().as_quadratic().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut x = vec![1.0 / 40.0; 40];
    let mut cache = f.build_cache(&x);
    for _ in 0..10_000 {
        let (i, j) = random_pair(40, &mut rng);
        let t = rng.random_range(-0.01..0.01);
        f.apply_pair_move(&mut cache, &x, i, j, t);
        x[i] += t;
        x[j] -= t;
    }
    assert!(f.cache_drift(&cache, &x) <= 1e-8);
}

#[test]
fn traces_are_deterministic() {
    let inst = gen_chebyshev(60, 8, 2);
    let x0 = inst.problem.check_feasible(&inst.starting_point(2)).unwrap();
    let cfg = Ac2cdConfig { index_rule: IndexRule::RateMode, epsilon: 1e-6, rng_seed: 99, ..Default::default() };
    let a = ac2cd_core::solve(&inst.problem, &x0, &cfg).unwrap();
    let b = ac2cd_core::solve(&inst.problem, &x0, &cfg).unwrap();
    assert_eq!(a.trace.to_csv(false), b.trace.to_csv(false));
    assert_eq!(a.x, b.x);
}

#[test]
fn infinite_bounds_give_infinite_distance() {
    let b = Bounds::free(1);
    assert_eq!(nearest_bound_distance(&b, &[3.0], 0), ExtReal::PosInf);
}
