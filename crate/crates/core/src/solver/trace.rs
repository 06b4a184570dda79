use std::fmt::{self, Write as _};

use thiserror::Error;

/// Why a run stopped abnormally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FailureKind {
    #[error("every coordinate sits on a bound (D^k = 0)")]
    DegenerateLevelSet,
    #[error("Armijo backtracking exceeded its cap")]
    BacktrackOverflow,
    #[error("line search exceeded its evaluation budget")]
    MaxEvalsExceeded,
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("no finite stepsize bound along the direction")]
    NoStepBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxOuter,
    NumericalFailure(FailureKind),
}

impl RunStatus {
    pub fn is_converged(self) -> bool {
        self == RunStatus::Converged
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Converged => f.write_str("converged"),
            RunStatus::MaxOuter => f.write_str("max_outer"),
            RunStatus::NumericalFailure(kind) => {
                let tag = match kind {
                    FailureKind::DegenerateLevelSet => "degenerate_level_set",
                    FailureKind::BacktrackOverflow => "backtrack_overflow",
                    FailureKind::MaxEvalsExceeded => "max_evals_exceeded",
                    FailureKind::NonFinite => "non_finite",
                    FailureKind::NoStepBound => "no_step_bound",
                };
                write!(f, "failure:{tag}")
            }
        }
    }
}

/// State after outer iteration `k`; record 0 describes the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub k: usize,
    pub objective: f64,
    pub kkt_residual: Option<f64>,
    pub g_min: f64,
    pub g_max: f64,
    /// Cumulative number of partial derivatives evaluated.
    pub partial_evals: u64,
    /// Cumulative number of pair moves actually applied.
    pub pair_updates: u64,
    /// Fixed index of the iteration, where the method has one.
    pub j: Option<usize>,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub method: String,
    pub records: Vec<OuterRecord>,
    pub status: RunStatus,
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl RunTrace {
    pub fn new(method: impl Into<String>) -> Self {
        Self { method: method.into(), records: Vec::new(), status: RunStatus::MaxOuter }
    }

    pub fn last(&self) -> &OuterRecord {
        self.records.last().expect("a trace always holds the starting record")
    }

    pub fn final_objective(&self) -> f64 {
        self.last().objective
    }

    /// Number of completed outer iterations.
    pub fn outer_iterations(&self) -> usize {
        self.last().k
    }

    pub fn final_kkt(&self) -> Option<f64> {
        self.last().kkt_residual
    }

    pub const CSV_HEADER: &'static str = "k,objective,kkt_residual,g_min,g_max,partial_evals,pair_updates,j,elapsed_secs";

    /// Comma-separated trace. Wall time is the last column so that
    /// `with_time = false` leaves a deterministic file.
    pub fn to_csv(&self, with_time: bool) -> String {
        let mut out = String::new();
        let header = if with_time {
            Self::CSV_HEADER
        } else {
            Self::CSV_HEADER.strip_suffix(",elapsed_secs").expect("time is the last column")
        };
        let _ = writeln!(out, "{header}");
        for r in &self.records {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.k,
                r.objective,
                opt(r.kkt_residual),
                r.g_min,
                r.g_max,
                r.partial_evals,
                r.pair_updates,
                opt(r.j),
            );
            if with_time {
                let _ = write!(out, ",{}", r.elapsed_secs);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "# status {}", self.status);
        out
    }
}
