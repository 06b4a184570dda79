//! Line-oriented instance format.
//!
//! ```text
//! ac2cd-instance 1
//! family chebyshev
//! seed 7
//! n 3
//! m 2
//! level 1
//! bounds simplex
//! lower 0 0 0
//! upper inf inf inf
//! objective quadratic dense 2
//! linear 1.5 0.25 2
//! diag none
//! col 0.1 -2
//! ...
//! end
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so reading back yields
//! bit-identical values. Sparse columns are written as `col r:v r:v` with
//! 0-based rows; log-exp payloads as four lines `a`, `b`, `c`, `d`.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{ColumnMatrix, Family, GeneratedInstance, InstanceObjective, SeparableLogExp, StructuredQuadratic, SuiteError};
use crate::extended::ExtReal;
use crate::problem::{Bounds, Problem};

const MAGIC: &str = "ac2cd-instance 1";

fn join<T: std::fmt::Display>(v: impl IntoIterator<Item = T>) -> String {
    let mut s = String::new();
    for (k, x) in v.into_iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x}");
    }
    s
}

fn bounds_mode(b: &Bounds) -> &'static str {
    let all = |v: &[ExtReal], e: ExtReal| v.iter().all(|&x| x == e);
    if all(b.lowers(), ExtReal::NegInf) && all(b.uppers(), ExtReal::PosInf) {
        "free"
    } else if all(b.lowers(), ExtReal::ZERO) && all(b.uppers(), ExtReal::PosInf) {
        "simplex"
    } else {
        "box"
    }
}

pub fn write_instance(inst: &GeneratedInstance) -> String {
    let p = &inst.problem;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "family {}", inst.family);
    let _ = writeln!(out, "seed {}", inst.seed);
    let _ = writeln!(out, "n {}", inst.n);
    let _ = writeln!(out, "m {}", inst.m);
    let _ = writeln!(out, "level {}", p.level());
    let _ = writeln!(out, "bounds {}", bounds_mode(p.bounds()));
    let _ = writeln!(out, "lower {}", join(p.bounds().lowers()));
    let _ = writeln!(out, "upper {}", join(p.bounds().uppers()));
    if let Some(v) = inst.reference_optimum {
        let _ = writeln!(out, "optimum {v}");
    }
    if let Some(l) = &inst.labels {
        let _ = writeln!(out, "labels {}", join(l));
    }
    if let Some((neg, pos)) = inst.diag_signs {
        let _ = writeln!(out, "diag_signs {neg} {pos}");
    }
    match p.objective() {
        InstanceObjective::Quadratic(f) => {
            let q = f.matrix();
            let kind = if q.is_sparse() { "sparse" } else { "dense" };
            let _ = writeln!(out, "objective quadratic {kind} {}", q.rows());
            let _ = writeln!(out, "linear {}", join(f.linear()));
            match f.diag() {
                Some(d) => {
                    let _ = writeln!(out, "diag {}", join(d));
                }
                None => {
                    let _ = writeln!(out, "diag none");
                }
            }
            for j in 0..q.cols() {
                let col = q.column(j);
                let body = if q.is_sparse() {
                    join(col.iter().map(|(r, v)| format!("{r}:{v}")))
                } else {
                    join(col.iter().map(|(_, v)| v))
                };
                let _ = writeln!(out, "col {body}");
            }
        }
        InstanceObjective::LogExp(f) => {
            let _ = writeln!(out, "objective logexp");
            let _ = writeln!(out, "a {}", join(f.a()));
            let _ = writeln!(out, "b {}", join(f.b()));
            let _ = writeln!(out, "c {}", join(f.c()));
            let _ = writeln!(out, "d {}", join(f.d()));
        }
    }
    let _ = writeln!(out, "end");
    out
}

fn ferr(msg: impl Into<String>) -> SuiteError {
    SuiteError::Format(msg.into())
}

fn parse_floats(s: &str) -> Result<Vec<f64>, SuiteError> {
    s.split_whitespace().map(|t| t.parse::<f64>().map_err(|_| ferr(format!("bad number `{t}`")))).collect()
}

fn parse_ext(s: &str) -> Result<Vec<ExtReal>, SuiteError> {
    parse_floats(s)?.into_iter().map(|v| ExtReal::from_f64(v).ok_or_else(|| ferr("NaN bound"))).collect()
}

pub fn read_instance(text: &str) -> Result<GeneratedInstance, SuiteError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(MAGIC) {
        return Err(ferr("missing instance header"));
    }
    let mut fields: HashMap<&str, &str> = HashMap::new();
    let mut cols: Vec<&str> = Vec::new();
    let mut ended = false;
    for line in lines {
        if line == "end" {
            ended = true;
            break;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        if key == "col" {
            cols.push(rest);
        } else if fields.insert(key, rest).is_some() {
            return Err(ferr(format!("duplicate field `{key}`")));
        }
    }
    if !ended {
        return Err(ferr("truncated instance: missing `end`"));
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| ferr(format!("missing field `{k}`")));
    let int = |k: &str| -> Result<u64, SuiteError> { get(k)?.parse().map_err(|_| ferr(format!("bad integer in `{k}`"))) };

    let family: Family = get("family")?.parse()?;
    let seed = int("seed")?;
    let n = int("n")? as usize;
    let m = int("m")? as usize;
    let level: f64 = get("level")?.parse().map_err(|_| ferr("bad level"))?;
    let bounds = Bounds::new(parse_ext(get("lower")?)?, parse_ext(get("upper")?)?)?;
    let reference_optimum = match fields.get("optimum") {
        Some(v) => Some(v.parse().map_err(|_| ferr("bad optimum"))?),
        None => None,
    };
    let labels = fields.get("labels").map(|v| parse_floats(v)).transpose()?;
    let diag_signs = match fields.get("diag_signs") {
        Some(v) => {
            let parts: Vec<usize> = v.split_whitespace().filter_map(|t| t.parse().ok()).collect();
            if parts.len() != 2 {
                return Err(ferr("bad diag_signs"));
            }
            Some((parts[0], parts[1]))
        }
        None => None,
    };

    let obj_spec: Vec<&str> = get("objective")?.split_whitespace().collect();
    let objective = match obj_spec.as_slice() {
        ["quadratic", kind, rows] => {
            let rows: usize = rows.parse().map_err(|_| ferr("bad row count"))?;
            let linear = parse_floats(get("linear")?)?;
            let diag = match get("diag")? {
                "none" => None,
                d => Some(parse_floats(d)?),
            };
            if cols.len() != n || linear.len() != n || diag.as_ref().is_some_and(|d| d.len() != rows) {
                return Err(ferr("quadratic payload dimensions disagree with header"));
            }
            let q = match *kind {
                "dense" => {
                    let mut data = Vec::with_capacity(rows * n);
                    for c in &cols {
                        let v = parse_floats(c)?;
                        if v.len() != rows {
                            return Err(ferr("dense column has wrong length"));
                        }
                        data.extend(v);
                    }
                    ColumnMatrix::dense(rows, n, data)
                }
                "sparse" => {
                    let mut columns = Vec::with_capacity(n);
                    for c in &cols {
                        let mut col = Vec::new();
                        for tok in c.split_whitespace() {
                            let (r, v) = tok.split_once(':').ok_or_else(|| ferr("sparse entry needs row:value"))?;
                            let r: usize = r.parse().map_err(|_| ferr("bad row"))?;
                            if r >= rows {
                                return Err(ferr("row index out of range"));
                            }
                            col.push((r, v.parse().map_err(|_| ferr("bad value"))?));
                        }
                        columns.push(col);
                    }
                    ColumnMatrix::sparse_from_columns(rows, columns)
                }
                other => return Err(ferr(format!("unknown storage `{other}`"))),
            };
            InstanceObjective::Quadratic(StructuredQuadratic::new(q, diag, linear))
        }
        ["logexp"] => {
            let [a, b, c, d] = ["a", "b", "c", "d"].map(|k| get(k).and_then(parse_floats));
            let (a, b, c, d) = (a?, b?, c?, d?);
            if [a.len(), b.len(), c.len(), d.len()].iter().any(|&l| l != n) || a.iter().any(|&v| v <= 0.0) {
                return Err(ferr("log-exp payload is malformed"));
            }
            InstanceObjective::LogExp(SeparableLogExp::new(a, b, c, d))
        }
        _ => return Err(ferr("unknown objective kind")),
    };
    let problem = Problem::new(objective, level, bounds)?;
    Ok(GeneratedInstance { family, seed, n, m, problem, reference_optimum, labels, diag_signs })
}
