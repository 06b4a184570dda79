//! The `verify` command: oracle checks with measured margins.

use std::fmt;
use std::time::Instant;

use ac2cd_core::baselines::{normalized_error, BaselineStop, MvpConfig, RcdConfig, SamplerMode};
use ac2cd_core::suite::{gen_chebyshev, gen_logexp, gen_nonconvex, toy_svm, GeneratedInstance, LogExpRegime};
use ac2cd_core::verify::{
    gradient_consistency, line_search_probe, random_feasible_point, random_pair, rate_bound_check,
    trajectory_equivalence,
};
use ac2cd_core::{baselines, solve, Objective, Problem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Instances with `n ≤ 100`.
    Fast,
    /// Adds more seeds and the `n = 500` Chebyshev comparison.
    Full,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Test hook: desynchronize the cache in the coherence check.
    pub corrupt_cache: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn at_most(name: impl Into<String>, measured: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), measured, tolerance, passed: measured <= tolerance, detail }
    }

    fn failed(name: impl Into<String>, detail: String) -> Self {
        Self { name: name.into(), measured: f64::NAN, tolerance: f64::NAN, passed: false, detail }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} measured {:.3e}  tol {:.1e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

fn families(level: Level, seed: u64) -> Vec<(String, GeneratedInstance)> {
    let n = match level {
        Level::Fast => 100,
        Level::Full => 500,
    };
    vec![
        ("chebyshev".into(), gen_chebyshev(n, 10, seed)),
        ("svm".into(), toy_svm()),
        ("logexp-1".into(), gen_logexp(n, seed, LogExpRegime::Wide)),
        ("logexp-2".into(), gen_logexp(n, seed, LogExpRegime::Narrow)),
        ("nonconvex".into(), gen_nonconvex(n.min(300), n.min(300), 0.5, seed)),
    ]
}

fn probe_points(inst: &GeneratedInstance, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = inst.starting_point(seed);
    (0..count).map(|_| random_feasible_point(&inst.problem, &base, 4 * inst.n, 1.0, &mut rng)).collect()
}

fn check_gradients(level: Level) -> Vec<CheckOutcome> {
    families(level, 11)
        .into_iter()
        .map(|(name, inst)| {
            let err = gradient_consistency(inst.problem.objective(), &probe_points(&inst, 5, 3));
            CheckOutcome::at_most(format!("gradient/{name}"), err, 1e-5, format!("n={}", inst.n))
        })
        .collect()
}

/// Probes wanted per family.
pub const LINE_SEARCH_PROBES: usize = 100;

/// Largest normalized gap between the exact and brute-force line searches
/// over `wanted` probes at random feasible points. Pairs that admit no move
/// are redrawn, up to ten attempts per probe. Returns the gap and the number
/// of probes taken.
pub fn line_search_gap(inst: &GeneratedInstance, wanted: usize, seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = inst.starting_point(seed);
    let mut worst = 0.0f64;
    let mut probes = 0;
    for _ in 0..10 * wanted {
        if probes == wanted {
            break;
        }
        let z = random_feasible_point(&inst.problem, &base, 4 * inst.n, 1.0, &mut rng);
        if let Some(p) = line_search_probe(&inst.problem, &z, &mut rng) {
            worst = worst.max(p.normalized_gap());
            probes += 1;
        }
    }
    (worst, probes)
}

fn check_line_search(level: Level) -> Vec<CheckOutcome> {
    families(level, 12)
        .into_iter()
        .map(|(name, inst)| {
            let (worst, probes) = line_search_gap(&inst, LINE_SEARCH_PROBES, 5);
            let mut c = CheckOutcome::at_most(format!("line-search/{name}"), worst, 1e-6, format!("{probes} probes"));
            c.passed &= probes == LINE_SEARCH_PROBES;
            c
        })
        .collect()
}

/// Cached value and partials after many incremental moves against a rebuild.
fn cache_drift<O: Objective>(problem: &Problem<O>, x0: &[f64], moves: usize, corrupt: bool) -> f64 {
    let f = problem.objective();
    let n = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut x = x0.to_vec();
    let mut cache = f.build_cache(&x);
    if corrupt {
        f.apply_pair_move(&mut cache, &x, 0, 1, 0.5);
    }
    for _ in 0..moves {
        let (p, j) = random_pair(n, &mut rng);
        // Move within the box: shift a fraction of x_j onto x_p.
        let t = 0.5 * x[j].max(0.0);
        f.apply_pair_move(&mut cache, &x, p, j, t);
        x[p] += t;
        x[j] -= t;
    }
    let fresh = f.build_cache(&x);
    let scale = 1.0 + f.cached_value(&fresh, &x).abs();
    let mut drift = (f.cached_value(&cache, &x) - f.cached_value(&fresh, &x)).abs() / scale;
    for i in 0..n {
        drift = drift.max((f.cached_partial(&cache, &x, i) - f.cached_partial(&fresh, &x, i)).abs() / scale);
    }
    drift
}

fn check_cache(level: Level, opts: VerifyOptions) -> CheckOutcome {
    let inst = match level {
        Level::Fast => gen_chebyshev(100, 10, 13),
        Level::Full => gen_chebyshev(500, 50, 13),
    };
    let x0 = vec![1.0 / inst.n as f64; inst.n];
    let d = cache_drift(&inst.problem, &x0, 10_000, opts.corrupt_cache);
    CheckOutcome::at_most("cache-coherence", d, 1e-8, "10000 moves".into())
}

fn check_trajectory(level: Level) -> CheckOutcome {
    let seeds = match level {
        Level::Fast => 5,
        Level::Full => 20,
    };
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let inst = gen_logexp(50, seed, LogExpRegime::Narrow);
        let x0 = match inst.problem.check_feasible(&[0.0; 50]) {
            Ok(x) => x,
            Err(e) => return CheckOutcome::failed("trajectory", e.to_string()),
        };
        match trajectory_equivalence(&inst.problem, &x0, (seed % 50) as usize, 10, seed) {
            Ok(d) => worst = worst.max(d),
            Err(e) => return CheckOutcome::failed("trajectory", format!("seed {seed}: {e}")),
        }
    }
    CheckOutcome::at_most("trajectory", worst, 1e-9, format!("n=50, {seeds} seeds, 10 sweeps"))
}

fn check_rate(level: Level) -> CheckOutcome {
    let seeds = match level {
        Level::Fast => 5,
        Level::Full => 20,
    };
    let mut violations = 0;
    let mut worst_fit = 0.0f64;
    for seed in 0..seeds {
        let inst = gen_logexp(100, seed, LogExpRegime::Narrow);
        let Some(f) = inst.problem.objective().as_logexp() else {
            return CheckOutcome::failed("rate-bound", "not a log-exp instance".into());
        };
        let prob = match Problem::new(f.clone(), inst.problem.level(), inst.problem.bounds().clone()) {
            Ok(p) => p,
            Err(e) => return CheckOutcome::failed("rate-bound", e.to_string()),
        };
        let ac2cd_core::IndexRule::Fixed(jbar) = inst.protocol_config().index_rule else {
            return CheckOutcome::failed("rate-bound", "protocol index is not fixed".into());
        };
        let x0 = prob.check_feasible(&vec![0.0; 100]).expect("origin is feasible");
        match rate_bound_check(&prob, &x0, jbar, seed, 5000) {
            Ok(rep) => {
                violations += rep.violations;
                worst_fit = worst_fit.max(rep.c_fit.unwrap_or(f64::INFINITY));
            }
            Err(e) => return CheckOutcome::failed("rate-bound", format!("seed {seed}: {e}")),
        }
    }
    let mut c = CheckOutcome::at_most(
        "rate-bound",
        violations as f64,
        0.0,
        format!("n=100, {seeds} seeds, max fitted C {worst_fit:.4}"),
    );
    c.passed &= worst_fit < 1.0;
    c
}

/// AC2CD, uniform RCD and MVP on Chebyshev `n = 500, m = 50`: the baselines
/// must reach normalized error `1e-6` against the AC2CD objective.
fn check_chebyshev_reproduction() -> CheckOutcome {
    let inst = gen_chebyshev(500, 50, 7);
    let name = "chebyshev-500";
    let run = || -> Result<f64, String> {
        let x0 = inst.problem.check_feasible(&inst.starting_point(1)).map_err(|e| e.to_string())?;
        let a = solve(&inst.problem, &x0, &inst.protocol_config()).map_err(|e| e.to_string())?;
        let target = a.trace.final_objective();
        let stop = BaselineStop::Target { f_target: target, nu: 1e-6 };
        let rc = RcdConfig {
            sampler: SamplerMode::Uniform,
            stepsize: baselines::default_rcd_stepsize(inst.problem.objective()),
            stop,
            max_outer: 1_000_000 / inst.n,
            rng_seed: 1,
            refresh_interval: 1000,
        };
        let r = baselines::run_rcd(&inst.problem, &x0, &rc).map_err(|e| e.to_string())?;
        let mc = MvpConfig {
            stop,
            line_search: ac2cd_core::StepsizeRule::exact(),
            max_iterations: 1_000_000,
            record_stride: inst.n,
        };
        let m = baselines::run_mvp(&inst.problem, &x0, &mc).map_err(|e| e.to_string())?;
        Ok(normalized_error(r.trace.final_objective(), target).max(normalized_error(m.trace.final_objective(), target)))
    };
    match run() {
        Ok(e) => CheckOutcome::at_most(name, e, 1e-6, "rcd_unif and mvp vs ac2cd".into()),
        Err(e) => CheckOutcome::failed(name, e),
    }
}

/// Runs the checks of `level` and returns their outcomes in order.
pub fn verify_suite(level: Level, opts: VerifyOptions) -> Vec<CheckOutcome> {
    let mut out = check_gradients(level);
    out.extend(check_line_search(level));
    out.push(check_cache(level, opts));
    out.push(check_trajectory(level));
    out.push(check_rate(level));
    if level == Level::Full {
        out.push(check_chebyshev_reproduction());
    }
    out
}

/// Prints each outcome and returns whether all passed.
pub fn report(outcomes: &[CheckOutcome], started: Instant) -> bool {
    for o in outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} checks, {failed} failed, {:.1}s", outcomes.len(), started.elapsed().as_secs_f64());
    failed == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_check_detects_corruption() {
        let ok = check_cache(Level::Fast, VerifyOptions::default());
        assert!(ok.passed, "{ok}");
        let bad = check_cache(Level::Fast, VerifyOptions { corrupt_cache: true });
        assert!(!bad.passed, "{bad}");
    }

    #[test]
    fn outcome_line_format() {
        let o = CheckOutcome::at_most("x", 2e-7, 1e-6, "d".into());
        assert_eq!(o.to_string(), format!("PASS {:<28} measured 2.000e-7  tol 1.0e-6  d", "x"));
    }
}
