#![allow(dead_code)]

use ac2cd_core::suite::{gen_chebyshev, gen_logexp, gen_nonconvex, toy_svm, GeneratedInstance, LogExpRegime};
use ac2cd_core::verify::random_feasible_point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One small instance of every family.
pub fn small_families(seed: u64) -> Vec<GeneratedInstance> {
    vec![
        gen_chebyshev(40, 10, seed),
        toy_svm(),
        gen_logexp(50, seed, LogExpRegime::Wide),
        gen_logexp(50, seed, LogExpRegime::Narrow),
        gen_nonconvex(30, 30, 0.5, seed),
    ]
}

/// Feasible points spread away from the family's starting point.
pub fn probe_points(inst: &GeneratedInstance, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = inst.starting_point(seed);
    (0..count).map(|_| random_feasible_point(&inst.problem, &base, 4 * inst.n, 1.0, &mut rng)).collect()
}
