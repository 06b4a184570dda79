//! Summary tables: one row per run plus per-method averages.

use std::fmt::Write as _;

use crate::experiment::RunResult;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    /// Repetition index, or `None` for the `avg` row.
    pub rep: Option<usize>,
    pub start_seed: Option<u64>,
    pub objective: f64,
    pub kkt_residual: Option<f64>,
    pub outer_iterations: f64,
    pub partial_evals: f64,
    pub status: String,
    pub wall_secs: f64,
}

const HEADER: [&str; 9] =
    ["method", "rep", "seed", "objective", "kkt_residual", "outer_iterations", "partial_evals", "status", "wall_secs"];

impl SummaryRow {
    pub fn from_run(run: &RunResult) -> Self {
        let last = run.trace.last();
        Self {
            method: run.method.name().to_string(),
            rep: Some(run.rep),
            start_seed: Some(run.start_seed),
            objective: last.objective,
            kkt_residual: last.kkt_residual,
            outer_iterations: run.trace.outer_iterations() as f64,
            partial_evals: last.partial_evals as f64,
            status: run.trace.status.to_string(),
            wall_secs: last.elapsed_secs,
        }
    }

    /// Rows for every run, followed by one `avg` row per method when there
    /// is more than one repetition.
    pub fn table(runs: &[RunResult]) -> Vec<SummaryRow> {
        let mut rows: Vec<SummaryRow> = runs.iter().map(Self::from_run).collect();
        let mut methods: Vec<&str> = Vec::new();
        for r in runs {
            if !methods.contains(&r.method.name()) {
                methods.push(r.method.name());
            }
        }
        let mut avgs = Vec::new();
        for m in methods {
            let group: Vec<&SummaryRow> = rows.iter().filter(|r| r.method == m).collect();
            if group.len() < 2 {
                continue;
            }
            let k = group.len() as f64;
            let mean = |f: &dyn Fn(&SummaryRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / k;
            let converged = group.iter().filter(|r| r.status == "converged").count();
            avgs.push(SummaryRow {
                method: m.to_string(),
                rep: None,
                start_seed: None,
                objective: mean(&|r| r.objective),
                kkt_residual: group.iter().map(|r| r.kkt_residual).collect::<Option<Vec<f64>>>().map(|v| v.iter().sum::<f64>() / k),
                outer_iterations: mean(&|r| r.outer_iterations),
                partial_evals: mean(&|r| r.partial_evals),
                status: format!("{converged}/{} converged", group.len()),
                wall_secs: mean(&|r| r.wall_secs),
            });
        }
        rows.extend(avgs);
        rows
    }

    fn cells(&self, with_time: bool) -> Vec<String> {
        let mut c = vec![
            self.method.clone(),
            self.rep.map_or_else(|| "avg".to_string(), |r| r.to_string()),
            self.start_seed.map_or_else(String::new, |s| s.to_string()),
            self.objective.to_string(),
            self.kkt_residual.map_or_else(String::new, |v| v.to_string()),
            self.outer_iterations.to_string(),
            self.partial_evals.to_string(),
            self.status.clone(),
        ];
        if with_time {
            c.push(format!("{:.6}", self.wall_secs));
        }
        c
    }
}

fn header(with_time: bool) -> &'static [&'static str] {
    if with_time {
        &HEADER
    } else {
        &HEADER[..HEADER.len() - 1]
    }
}

/// Comma-separated summary; wall time is the last column.
pub fn summary_csv(rows: &[SummaryRow], with_time: bool) -> String {
    let mut out = header(with_time).join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.cells(with_time).join(","));
        out.push('\n');
    }
    out
}

/// Aligned plain-text table.
pub fn summary_text(rows: &[SummaryRow], with_time: bool) -> String {
    let head: Vec<String> = header(with_time).iter().map(|s| s.to_string()).collect();
    let body: Vec<Vec<String>> = rows.iter().map(|r| r.cells(with_time)).collect();
    let widths: Vec<usize> = (0..head.len())
        .map(|c| body.iter().map(|row| row[c].len()).chain([head[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in std::iter::once(&head).chain(&body) {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| if c < 3 || c == 7 { format!("{cell:<w$}", w = widths[c]) } else { format!("{cell:>w$}", w = widths[c]) })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
