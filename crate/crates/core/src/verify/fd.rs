use crate::problem::Objective;

/// Five-point central differences of `value` in ambient coordinates, with
/// step `h·(1 + |x_i|)` per coordinate. The truncation error is `O(h⁴)`, so a
/// moderate `h` keeps cancellation in large objective values small.
pub fn finite_diff_gradient<O: Objective>(objective: &O, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    let mut at = |i: usize, t: f64| {
        probe[i] = x[i] + t;
        let v = objective.value(&probe);
        probe[i] = x[i];
        v
    };
    (0..x.len())
        .map(|i| {
            let s = h * (1.0 + x[i].abs());
            (8.0 * (at(i, s) - at(i, -s)) - (at(i, 2.0 * s) - at(i, -2.0 * s))) / (12.0 * s)
        })
        .collect()
}

/// Largest `|a_i − b_i| / max(1, |b_i|)`.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs() / v.abs().max(1.0)).fold(0.0, f64::max)
}
