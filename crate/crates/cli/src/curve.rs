//! Normalized error against time, ready for a log-scale plot.

use std::fmt::Write as _;

use ac2cd_core::baselines::normalized_error;
use ac2cd_core::RunTrace;

/// Smallest error written; smaller or negative values are clamped and flagged.
pub const ERROR_FLOOR: f64 = 1e-16;

/// Rows `elapsed_secs,normalized_error,clamped` with the error
/// `(f − f_target)/(1 + |f_target|)`.
pub fn emit_error_curve(trace: &RunTrace, f_target: f64) -> String {
    let mut out = String::from("elapsed_secs,normalized_error,clamped\n");
    for r in &trace.records {
        let e = normalized_error(r.objective, f_target);
        let clamped = !(e >= ERROR_FLOOR);
        let _ = writeln!(out, "{},{},{}", r.elapsed_secs, if clamped { ERROR_FLOOR } else { e }, u8::from(clamped));
    }
    out
}
