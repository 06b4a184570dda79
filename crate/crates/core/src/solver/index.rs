//! Choice of the fixed index `j(k)` of an outer iteration.

use crate::extended::ExtReal;
use crate::problem::{nearest_bound_distance, Bounds};

use super::FailureKind;

/// How `j(k)` is chosen at each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexRule {
    /// Smallest index with `D_j ≥ τ·D^k`.
    ThresholdAny,
    /// Keep `j(k−1)` while it passes the threshold, else the smallest argmax.
    RateMode,
    /// The same index at every outer iteration (unbounded variables).
    Fixed(usize),
}

fn distances(bounds: &Bounds, x: &[f64]) -> (Vec<ExtReal>, ExtReal) {
    let d: Vec<ExtReal> = (0..x.len()).map(|h| nearest_bound_distance(bounds, x, h)).collect();
    let dk = d.iter().copied().fold(ExtReal::ZERO, ExtReal::max);
    (d, dk)
}

fn passes(d: ExtReal, tau: f64, dk: ExtReal) -> bool {
    match dk {
        ExtReal::PosInf => d == ExtReal::PosInf,
        _ => d >= dk.scale(tau),
    }
}

/// `D^k = max_h D_h(x)`; zero means every coordinate sits on a bound.
pub fn max_bound_distance(bounds: &Bounds, x: &[f64]) -> ExtReal {
    distances(bounds, x).1
}

pub fn select_index_threshold(bounds: &Bounds, x: &[f64], tau: f64) -> Result<usize, FailureKind> {
    let (d, dk) = distances(bounds, x);
    if dk == ExtReal::ZERO {
        return Err(FailureKind::DegenerateLevelSet);
    }
    Ok(d.iter().position(|&dh| passes(dh, tau, dk)).expect("the argmax always qualifies"))
}

/// With `j_prev = None` (first outer iteration) this is the smallest argmax.
pub fn select_index_rate_mode(
    bounds: &Bounds,
    x: &[f64],
    j_prev: Option<usize>,
    tau: f64,
) -> Result<usize, FailureKind> {
    let (d, dk) = distances(bounds, x);
    if dk == ExtReal::ZERO {
        return Err(FailureKind::DegenerateLevelSet);
    }
    if let Some(j) = j_prev {
        if passes(d[j], tau, dk) {
            return Ok(j);
        }
    }
    Ok(d.iter().position(|&dh| dh == dk).expect("the maximum is attained"))
}
