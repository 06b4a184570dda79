//! Linear SVM dual from a sparse labelled dataset.
//!
//! The dual `min ½ Σ a_i a_j vᵢᵀvⱼ s_i s_j − Σ s_i` s.t. `Σ a_i s_i = 0`,
//! `0 ≤ s ≤ C` is rewritten with `x_i = a_i s_i`. Because `a_i² = 1` this gives
//! `½ ‖Σ x_i vⁱ‖² − Σ a_i x_i` with `Σ x_i = 0` and `x_i ∈ [0,C]` for positive
//! labels, `x_i ∈ [−C,0]` for negative ones.

use std::path::Path;

use super::{ColumnMatrix, Family, GeneratedInstance, InstanceObjective, StructuredQuadratic, SuiteError};
use crate::extended::ExtReal;
use crate::problem::{Bounds, Problem};

/// Bundled two-class toy dataset (200 samples in `ℝ⁵`).
pub const TOY_SVM_DATA: &str = include_str!("../../data/toy_svm.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub label: f64,
    /// 0-based feature index and value.
    pub features: Vec<(usize, f64)>,
}

/// Parses `<label> <index>:<value> ...` lines with 1-based, strictly increasing
/// indices. Blank lines and `#` comments are skipped.
pub fn parse_svm_text(text: &str) -> Result<Vec<Sample>, SuiteError> {
    let mut samples = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| SuiteError::Parse { line: line_no, msg };
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| perr(format!("bad label `{label_tok}`")))?;
        if label != 1.0 && label != -1.0 {
            return Err(SuiteError::Label { line: line_no, label });
        }
        let mut features = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| perr(format!("expected index:value, got `{tok}`")))?;
            let idx: usize = idx.parse().map_err(|_| perr(format!("bad index `{idx}`")))?;
            let val: f64 = val.parse().map_err(|_| perr(format!("bad value `{val}`")))?;
            if idx == 0 || idx <= last {
                return Err(perr(format!("index {idx} is not 1-based and strictly increasing")));
            }
            if !val.is_finite() {
                return Err(perr(format!("non-finite value at index {idx}")));
            }
            last = idx;
            features.push((idx - 1, val));
        }
        samples.push(Sample { label, features });
    }
    if samples.is_empty() {
        return Err(SuiteError::Parse { line: 0, msg: "no samples".into() });
    }
    Ok(samples)
}

/// Builds the transformed dual with box parameter `c`.
pub fn svm_dual_from_samples(samples: &[Sample], c: f64) -> Result<GeneratedInstance, SuiteError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(SuiteError::Format(format!("C must be positive and finite, got {c}")));
    }
    let n = samples.len();
    let m = samples.iter().filter_map(|s| s.features.last().map(|&(i, _)| i + 1)).max().unwrap_or(0).max(1);
    let columns = samples.iter().map(|s| s.features.clone()).collect();
    let labels: Vec<f64> = samples.iter().map(|s| s.label).collect();
    let q = ColumnMatrix::sparse_from_columns(m, columns);
    let (lower, upper): (Vec<ExtReal>, Vec<ExtReal>) = labels
        .iter()
        .map(|&a| if a > 0.0 { (ExtReal::ZERO, ExtReal::Finite(c)) } else { (ExtReal::Finite(-c), ExtReal::ZERO) })
        .unzip();
    let objective = InstanceObjective::Quadratic(StructuredQuadratic::new(q, None, labels.clone()));
    let problem = Problem::new(objective, 0.0, Bounds::new(lower, upper)?)?;
    Ok(GeneratedInstance {
        family: Family::SvmDual,
        seed: 0,
        n,
        m,
        problem,
        reference_optimum: None,
        labels: Some(labels),
        diag_signs: None,
    })
}

pub fn svm_dual_from_text(text: &str, c: f64) -> Result<GeneratedInstance, SuiteError> {
    svm_dual_from_samples(&parse_svm_text(text)?, c)
}

pub fn load_svm_dual(path: impl AsRef<Path>, c: f64) -> Result<GeneratedInstance, SuiteError> {
    svm_dual_from_text(&std::fs::read_to_string(path)?, c)
}

/// The bundled dataset with `C = 1`.
pub fn toy_svm() -> GeneratedInstance {
    svm_dual_from_text(TOY_SVM_DATA, 1.0).expect("bundled dataset is well formed")
}
