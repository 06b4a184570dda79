//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use ac2cd_cli::checks::{line_search_gap, LINE_SEARCH_PROBES};
use ac2cd_cli::config::{ExperimentConfig, MethodKind, MethodSpec};
use ac2cd_cli::experiment::ac2cd_config;
use ac2cd_cli::output::write_outputs;
use ac2cd_cli::run_experiment_with_threads;
use ac2cd_core::baselines::{decode_pair, encode_pair, normalized_error, pair_count, PairSampler};
use ac2cd_core::solver::{compute_stepsize, max_feasible_stepsize};
use ac2cd_core::suite::{
    chebyshev_from_points, gen_chebyshev, gen_logexp, gen_nonconvex, toy_svm, Family, GeneratedInstance,
    InstanceObjective, LogExpRegime,
};
use ac2cd_core::verify::{
    check_step_contracts, random_feasible_point, random_pair, rate_bound_check, trajectory_equivalence,
};
use ac2cd_core::{solve, ExtReal, IndexRule, Objective, Problem, StepsizeRule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const STATIONARITY_EPS: [f64; 2] = [1e-1, 1e-6];
const RUNTIME_LIMIT_SECS: f64 = 60.0;
const NU: f64 = 1e-6;
const INNER_BUDGET: usize = 1_000_000;
const TOY_F_TOL: f64 = 1e-9;
const TOY_X_TOL: f64 = 1e-6;
const TRAJECTORY_TOL: f64 = 1e-9;
const LINE_SEARCH_TOL: f64 = 1e-6;
const CURVATURE_ORACLE_TOL: f64 = 1e-10;
const CONTRACT_STEPS: usize = 10_000;
const SAMPLER_DRAWS: usize = 100_000;
const SAMPLER_SE: f64 = 3.0;
const NONCONVEX_EPS: f64 = 1e-1;

type Outcome = (bool, String);

/// The convex desk-scale instances as experiment configs.
fn convex_configs() -> Vec<(&'static str, ExperimentConfig)> {
    let cheb = ExperimentConfig::for_family(Family::Chebyshev);
    let mut le1 = ExperimentConfig::for_family(Family::LogExp);
    le1.instance.regime = Some(1);
    let mut le2 = le1.clone();
    le2.instance.regime = Some(2);
    let svm = ExperimentConfig::for_family(Family::SvmDual);
    let mut out = vec![("chebyshev-500-50", cheb), ("logexp-1000-r1", le1), ("logexp-1000-r2", le2), ("toy-svm", svm)];
    for (_, c) in &mut out {
        c.instance.seed = 7;
        c.stop.nu = NU;
        c.stop.inner_budget = INNER_BUDGET;
    }
    out
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, mut cfg) in convex_configs() {
        let inst = cfg.build_instance().unwrap();
        let seed = cfg.repetitions.seed_list()[0];
        let x0 = inst.problem.check_feasible(&inst.starting_point(seed)).unwrap();
        for eps in STATIONARITY_EPS {
            cfg.stop.epsilon = eps;
            let c = ac2cd_config(&inst, &MethodSpec::new(MethodKind::Ac2cd), &cfg, seed).unwrap();
            let t = Instant::now();
            let out = solve(&inst.problem, &x0, &c).unwrap();
            let secs = t.elapsed().as_secs_f64();
            let kkt = inst.problem.kkt_residual(&out.x).unwrap();
            let pass = out.trace.status.is_converged() && kkt <= eps && secs <= RUNTIME_LIMIT_SECS;
            ok &= pass;
            parts.push(format!("{name}@{eps:e}: kkt {kkt:.2e} {secs:.1}s{}", if pass { "" } else { " FAIL" }));
        }
    }
    (ok, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, mut cfg) in convex_configs() {
        cfg.stop.epsilon = 1e-1;
        cfg.methods = [MethodKind::Ac2cd, MethodKind::RcdUnif, MethodKind::Mvp].map(MethodSpec::new).to_vec();
        let out = run_experiment_with_threads(&cfg, 2).unwrap();
        let n = cfg.build_instance().unwrap().n;
        let target = out.runs.iter().find(|r| r.method == MethodKind::Ac2cd).unwrap().trace.final_objective();
        for r in out.runs.iter().filter(|r| r.method != MethodKind::Ac2cd) {
            let err = normalized_error(r.trace.final_objective(), target);
            // RCD counts n inner steps per outer iteration; MVP one per iteration.
            let inner = match r.method {
                MethodKind::Mvp => r.trace.last().k,
                _ => r.trace.last().k * n,
            };
            let pass = err <= NU && inner <= INNER_BUDGET;
            ok &= pass;
            parts.push(format!("{name}/{}: err {err:.2e} inner {inner}{}", r.method.name(), if pass { "" } else { " FAIL" }));
        }
    }
    (ok, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let inst = chebyshev_from_points(&[vec![0.0], vec![2.0]], 0);
    let x0 = inst.problem.check_feasible(&[1.0, 0.0]).unwrap();
    let cfg = ac2cd_core::Ac2cdConfig { epsilon: 1e-10, ..inst.protocol_config() };
    let out = solve(&inst.problem, &x0, &cfg).unwrap();
    let f = inst.problem.objective().value(&out.x);
    let dx = out.x.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    let ok = (f + 1.0).abs() <= TOY_F_TOL && dx <= TOY_X_TOL;
    (ok, format!("f* {f:.15} (|f+1| {:.1e}), max|x-1/2| {dx:.1e}", (f + 1.0).abs()))
}

fn logexp_problem(inst: &GeneratedInstance) -> Problem<ac2cd_core::suite::SeparableLogExp> {
    let f = inst.problem.objective().as_logexp().unwrap().clone();
    Problem::new(f, inst.problem.level(), inst.problem.bounds().clone()).unwrap()
}

fn criterion_4() -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    let mut worst_fit = 0.0f64;
    let mut min_gap_c = f64::INFINITY;
    let mut ok = true;
    for seed in 0..20 {
        let inst = gen_logexp(100, seed, LogExpRegime::Narrow);
        let IndexRule::Fixed(jbar) = inst.protocol_config().index_rule else { unreachable!() };
        let prob = logexp_problem(&inst);
        let x0 = prob.check_feasible(&[0.0; 100]).unwrap();
        let rep = rate_bound_check(&prob, &x0, jbar, seed, 5000).unwrap();
        violations += rep.violations;
        checked += rep.checked;
        let fit = rep.c_fit.unwrap_or(f64::INFINITY);
        worst_fit = worst_fit.max(fit);
        min_gap_c = min_gap_c.min(1.0 - rep.c_bound.unwrap_or(1.0));
        ok &= rep.violations == 0 && rep.checked > 0 && fit < 1.0;
    }
    (ok, format!("20 seeds, {checked} steps checked, {violations} violations; min 1-C {min_gap_c:.2e}; max fitted C {worst_fit:.4}"))
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let inst = gen_logexp(50, seed, LogExpRegime::Narrow);
        let x0 = inst.problem.check_feasible(&[0.0; 50]).unwrap();
        worst = worst.max(trajectory_equivalence(&inst.problem, &x0, (seed % 50) as usize, 10, seed).unwrap());
    }
    (worst <= TRAJECTORY_TOL, format!("max deviation {worst:.2e} over 20 seeds (tol {TRAJECTORY_TOL:e})"))
}

fn families(seed: u64) -> Vec<(&'static str, GeneratedInstance)> {
    vec![
        ("chebyshev", gen_chebyshev(100, 10, seed)),
        ("svm", toy_svm()),
        ("logexp-r1", gen_logexp(100, seed, LogExpRegime::Wide)),
        ("logexp-r2", gen_logexp(100, seed, LogExpRegime::Narrow)),
        ("nonconvex", gen_nonconvex(100, 100, 0.5, seed)),
    ]
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, inst) in families(21) {
        let (gap, probes) = line_search_gap(&inst, LINE_SEARCH_PROBES, 21);
        ok &= gap <= LINE_SEARCH_TOL && probes == LINE_SEARCH_PROBES;
        parts.push(format!("{name} {gap:.1e}/{probes}"));
    }
    // Closed-form quadratic step against the dense Hessian.
    let mut exact = 0;
    let mut mismatched = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for (_, inst) in families(22) {
        let InstanceObjective::Quadratic(q) = inst.problem.objective() else { continue };
        let f = inst.problem.objective();
        let h = q.dense_hessian();
        let base = inst.starting_point(22);
        let mut taken = 0;
        while taken < LINE_SEARCH_PROBES {
            let z = random_feasible_point(&inst.problem, &base, 4 * inst.n, 1.0, &mut rng);
            let (p, j) = random_pair(inst.n, &mut rng);
            let oracle = h[p][p] + h[j][j] - h[p][j] - h[j][p];
            let cache = f.build_cache(&z);
            let g = f.cached_partial(&cache, &z, j) - f.cached_partial(&cache, &z, p);
            let amax = max_feasible_stepsize(inst.problem.bounds(), &z, p, j, g);
            if !(oracle > 0.0) || g == 0.0 || amax == ExtReal::ZERO {
                continue;
            }
            let kappa = q.pair_curvature(p, j).unwrap();
            let (alpha, _) = compute_stepsize(f, &cache, &z, p, j, g, amax, &StepsizeRule::quadratic()).unwrap();
            let closed = amax.min(ExtReal::Finite(1.0 / kappa));
            if (kappa - oracle).abs() > CURVATURE_ORACLE_TOL * (1.0 + oracle.abs()) || ExtReal::Finite(alpha) != closed {
                mismatched += 1;
            }
            taken += 1;
        }
        exact += taken;
    }
    ok &= mismatched == 0;
    (ok, format!("max |a-a_bf|/amax per family: {}; quadratic clip {exact} probes, {mismatched} mismatches", parts.join(", ")))
}

fn criterion_7() -> Outcome {
    let rules = [StepsizeRule::armijo(), StepsizeRule::lipschitz(), StepsizeRule::quadratic(), StepsizeRule::exact()];
    let insts = families(31);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut ok = true;
    let mut parts = Vec::new();
    for rule in rules {
        let usable: Vec<&GeneratedInstance> = insts
            .iter()
            .map(|(_, i)| i)
            .filter(|i| !matches!(rule, StepsizeRule::Quadratic { .. }) || i.problem.objective().as_quadratic().is_some())
            .collect();
        let mut violations = 0;
        let mut errors = 0;
        for step in 0..CONTRACT_STEPS {
            let inst = usable[step % usable.len()];
            let base = inst.starting_point(step as u64);
            let mut z = random_feasible_point(&inst.problem, &base, 2 * inst.n, 1.0, &mut rng);
            let (p, j) = random_pair(inst.n, &mut rng);
            match check_step_contracts(&inst.problem, &mut z, p, j, &rule) {
                Ok(v) if v.any() => violations += 1,
                Ok(_) => {}
                Err(_) => errors += 1,
            }
        }
        ok &= violations == 0 && errors == 0;
        parts.push(format!("{} {violations}+{errors}", rule.name()));
    }
    (ok, format!("{CONTRACT_STEPS} steps per rule, violations+errors: {}", parts.join(", ")))
}

fn criterion_8() -> Outcome {
    let mut bijective = true;
    for n in 2..=50usize {
        let count = pair_count(n);
        let mut seen = BTreeSet::new();
        for k in 0..count {
            let (i, j) = decode_pair(k);
            // Decoded pairs put the larger index first.
            bijective &= j < i && i < n && encode_pair(i, j) == k && seen.insert((i, j));
        }
        bijective &= seen.len() as u64 == (n * (n - 1) / 2) as u64;
    }
    let lips: Vec<f64> = (0..10).map(|i| 0.5 + 0.37 * i as f64).collect();
    let sampler = PairSampler::lipschitz_weighted(&lips).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for _ in 0..SAMPLER_DRAWS {
        let (i, j) = sampler.sample(&mut rng);
        *counts.entry((i.min(j), i.max(j))).or_default() += 1;
    }
    let total: f64 = (0..10).flat_map(|i| (i + 1..10).map(move |j| (i, j))).map(|(i, j)| 1.0 / lips[i] + 1.0 / lips[j]).sum();
    let draws = SAMPLER_DRAWS as f64;
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in i + 1..10 {
            let p = (1.0 / lips[i] + 1.0 / lips[j]) / total;
            let se = (p * (1.0 - p) / draws).sqrt();
            let freq = counts.get(&(i, j)).copied().unwrap_or(0) as f64 / draws;
            worst = worst.max((freq - p).abs() / se);
        }
    }
    let ok = bijective && worst <= SAMPLER_SE && counts.len() == 45;
    (ok, format!("bijection n=2..50 {}; weighted n=10 max deviation {worst:.2} SE over {SAMPLER_DRAWS} draws", if bijective { "ok" } else { "BROKEN" }))
}

fn criterion_9() -> Outcome {
    let mut cfg = ExperimentConfig::for_family(Family::Nonconvex);
    cfg.instance.seed = 5;
    cfg.stop.epsilon = NONCONVEX_EPS;
    cfg.repetitions.count = 10;
    cfg.methods = vec![MethodSpec::new(MethodKind::Ac2cd), MethodSpec::new(MethodKind::Mvp)];
    let out = run_experiment_with_threads(&cfg, 4).unwrap();
    let mut ok = out.runs.len() == 20;
    let mut worst = BTreeMap::new();
    for r in &out.runs {
        let kkt = r.trace.final_kkt().unwrap_or(f64::INFINITY);
        ok &= r.trace.status.is_converged() && kkt <= NONCONVEX_EPS;
        let w = worst.entry(r.method.name()).or_insert(0.0f64);
        *w = w.max(kkt);
    }
    let desc: Vec<String> = worst.iter().map(|(m, w)| format!("{m} max residual {w:.3e}")).collect();
    (ok, format!("n=m=300, 10 starts: {}", desc.join(", ")))
}

fn read_dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn criterion_10() -> Outcome {
    let mut ok = true;
    let mut files = 0;
    for family in [Family::Chebyshev, Family::LogExp, Family::Nonconvex] {
        let mut cfg = ExperimentConfig::for_family(family);
        cfg.instance.n = Some(120);
        cfg.instance.m = cfg.instance.m.map(|_| 30);
        cfg.repetitions.count = 3;
        cfg.output.with_time = false;
        cfg.output.curves = false;
        cfg.methods = [MethodKind::Ac2cd, MethodKind::RcdUnif, MethodKind::RcdLips, MethodKind::Mvp]
            .map(MethodSpec::new)
            .to_vec();
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for (threads, dir) in [1, 4].into_iter().zip(&dirs) {
            cfg.output.dir = dir.path().to_path_buf();
            write_outputs(&run_experiment_with_threads(&cfg, threads).unwrap(), &cfg.output).unwrap();
        }
        let (a, b) = (read_dir_files(dirs[0].path()), read_dir_files(dirs[1].path()));
        ok &= a == b && a.len() == 3 * 4 + 2;
        files += a.len();
    }
    (ok, format!("{files} trace and summary files byte-identical across two runs (1 vs 4 threads)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("stationarity", criterion_1),
        ("cross-method agreement", criterion_2),
        ("toy chebyshev exactness", criterion_3),
        ("non-asymptotic rate", criterion_4),
        ("trajectory equivalence", criterion_5),
        ("line-search oracle", criterion_6),
        ("stepsize contracts", criterion_7),
        ("sampler correctness", criterion_8),
        ("non-convex stationarity", criterion_9),
        ("determinism", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {:<25} {} ({:.1}s) {detail}",
            k + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", criteria.len() - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
