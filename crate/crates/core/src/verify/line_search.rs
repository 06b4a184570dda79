use crate::problem::Objective;

/// Grid scan of `φ(α) = f(z + αg(e_p − e_j)) − f(z)` over `[0, alpha_max]`
/// followed by ternary refinement around the best grid point.
pub fn brute_force_line_search<O: Objective>(
    objective: &O,
    cache: &O::Cache,
    z: &[f64],
    p: usize,
    j: usize,
    g: f64,
    alpha_max: f64,
    grid: usize,
) -> f64 {
    assert!(alpha_max.is_finite() && alpha_max >= 0.0, "the scan needs a finite interval");
    if g == 0.0 || alpha_max == 0.0 {
        return 0.0;
    }
    let grid = grid.max(2);
    let phi = |a: f64| objective.cached_pair_delta(cache, z, p, j, a * g);
    let h = alpha_max / grid as f64;
    let (mut best_k, mut best) = (0usize, 0.0);
    for k in 1..=grid {
        let v = phi(k as f64 * h);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let (mut lo, mut hi) = ((best_k.saturating_sub(1)) as f64 * h, ((best_k + 1).min(grid)) as f64 * h);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if phi(m1) <= phi(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let refined = 0.5 * (lo + hi);
    // Keep the endpoint or grid point if refinement did not improve on it.
    let grid_best = best_k as f64 * h;
    if phi(refined) <= phi(grid_best) {
        refined
    } else {
        grid_best
    }
}
