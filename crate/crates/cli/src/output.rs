//! Writes traces, curves and summaries of an experiment.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{MethodKind, OutputSpec};
use crate::curve::emit_error_curve;
use crate::experiment::ExperimentOutput;
use crate::summary::{summary_csv, summary_text};
use crate::CliError;

pub fn trace_file_name(method: MethodKind, rep: usize) -> String {
    format!("trace_{}_rep{rep}.csv", method.name())
}

pub fn curve_file_name(method: MethodKind, rep: usize) -> String {
    format!("curve_{}_rep{rep}.csv", method.name())
}

/// Writes every file of `out` under `spec.dir` and returns their paths.
///
/// Curves are written for convex families; AC2CD's own curve is measured
/// against its final objective.
pub fn write_outputs(out: &ExperimentOutput, spec: &OutputSpec) -> Result<Vec<PathBuf>, CliError> {
    let dir = spec.dir.as_path();
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        written.push(path);
        Ok(())
    };
    for run in &out.runs {
        put(trace_file_name(run.method, run.rep), run.trace.to_csv(spec.with_time))?;
        if spec.curves && out.family.is_convex() {
            let target = run.f_target.unwrap_or_else(|| run.trace.final_objective());
            put(curve_file_name(run.method, run.rep), emit_error_curve(&run.trace, target))?;
        }
    }
    let rows = out.summary();
    put("summary.csv".into(), summary_csv(&rows, spec.with_time))?;
    put("summary.txt".into(), summary_text(&rows, spec.with_time))?;
    Ok(written)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
