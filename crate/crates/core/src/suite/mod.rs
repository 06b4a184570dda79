//! Experiment families: generators, the dataset loader, and the instance file
//! format.

mod format;
mod generators;
mod logexp;
mod quadratic;
mod svm;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::problem::{Objective, Problem, ProblemError};
use crate::solver::{Ac2cdConfig, IndexRule, StepsizeRule};

pub use format::{read_instance, write_instance};
pub use generators::{chebyshev_from_points, gen_chebyshev, gen_logexp, gen_nonconvex, logexp_instance, LogExpRegime};
pub use logexp::{sigmoid, softplus, SeparableLogExp};
pub use quadratic::{ColumnMatrix, QuadCache, StructuredQuadratic};
pub use svm::{load_svm_dual, parse_svm_text, svm_dual_from_samples, svm_dual_from_text, toy_svm, Sample, TOY_SVM_DATA};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: label {label} is not -1 or +1")]
    Label { line: usize, label: f64 },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Chebyshev,
    SvmDual,
    LogExp,
    Nonconvex,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Chebyshev => "chebyshev",
            Family::SvmDual => "svm",
            Family::LogExp => "logexp",
            Family::Nonconvex => "nonconvex",
        }
    }

    pub fn is_convex(self) -> bool {
        !matches!(self, Family::Nonconvex)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = SuiteError;
    fn from_str(s: &str) -> Result<Self, SuiteError> {
        match s {
            "chebyshev" => Ok(Family::Chebyshev),
            "svm" => Ok(Family::SvmDual),
            "logexp" => Ok(Family::LogExp),
            "nonconvex" => Ok(Family::Nonconvex),
            other => Err(SuiteError::Format(format!("unknown family `{other}`"))),
        }
    }
}

/// Objective of a generated instance.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceObjective {
    Quadratic(StructuredQuadratic),
    LogExp(SeparableLogExp),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceCache {
    Quadratic(QuadCache),
    LogExp,
}

impl InstanceObjective {
    pub fn as_quadratic(&self) -> Option<&StructuredQuadratic> {
        match self {
            InstanceObjective::Quadratic(q) => Some(q),
            InstanceObjective::LogExp(_) => None,
        }
    }

    pub fn as_logexp(&self) -> Option<&SeparableLogExp> {
        match self {
            InstanceObjective::LogExp(f) => Some(f),
            InstanceObjective::Quadratic(_) => None,
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $cache:ident, $f:ident, $q:expr, $l:expr) => {
        match ($self, $cache) {
            (InstanceObjective::Quadratic($f), InstanceCache::Quadratic($cache)) => $q,
            (InstanceObjective::LogExp($f), InstanceCache::LogExp) => $l,
            _ => panic!("cache does not belong to this objective"),
        }
    };
}

impl Objective for InstanceObjective {
    type Cache = InstanceCache;

    fn dim(&self) -> usize {
        match self {
            InstanceObjective::Quadratic(f) => f.dim(),
            InstanceObjective::LogExp(f) => f.dim(),
        }
    }

    fn build_cache(&self, x: &[f64]) -> InstanceCache {
        match self {
            InstanceObjective::Quadratic(f) => InstanceCache::Quadratic(f.build_cache(x)),
            InstanceObjective::LogExp(_) => InstanceCache::LogExp,
        }
    }

    fn cached_value(&self, cache: &InstanceCache, x: &[f64]) -> f64 {
        dispatch!(self, cache, f, f.cached_value(cache, x), f.cached_value(&(), x))
    }

    #[inline]
    fn cached_partial(&self, cache: &InstanceCache, x: &[f64], i: usize) -> f64 {
        dispatch!(self, cache, f, f.cached_partial(cache, x, i), f.cached_partial(&(), x, i))
    }

    fn cached_pair_delta(&self, cache: &InstanceCache, x: &[f64], i: usize, j: usize, t: f64) -> f64 {
        dispatch!(self, cache, f, f.cached_pair_delta(cache, x, i, j, t), f.cached_pair_delta(&(), x, i, j, t))
    }

    fn cached_pair_slope(&self, cache: &InstanceCache, x: &[f64], i: usize, j: usize, t: f64) -> f64 {
        dispatch!(self, cache, f, f.cached_pair_slope(cache, x, i, j, t), f.cached_pair_slope(&(), x, i, j, t))
    }

    fn apply_pair_move(&self, cache: &mut InstanceCache, x: &[f64], i: usize, j: usize, t: f64) {
        dispatch!(self, cache, f, f.apply_pair_move(cache, x, i, j, t), f.apply_pair_move(&mut (), x, i, j, t))
    }

    fn pair_lipschitz(&self, i: usize, j: usize) -> Option<f64> {
        match self {
            InstanceObjective::Quadratic(f) => f.pair_lipschitz(i, j),
            InstanceObjective::LogExp(f) => f.pair_lipschitz(i, j),
        }
    }

    fn coordinate_lipschitz(&self, i: usize) -> Option<f64> {
        match self {
            InstanceObjective::Quadratic(f) => f.coordinate_lipschitz(i),
            InstanceObjective::LogExp(f) => f.coordinate_lipschitz(i),
        }
    }

    fn pair_curvature(&self, i: usize, j: usize) -> Option<f64> {
        match self {
            InstanceObjective::Quadratic(f) => f.pair_curvature(i, j),
            InstanceObjective::LogExp(_) => None,
        }
    }

    fn is_separable(&self) -> bool {
        matches!(self, InstanceObjective::LogExp(_))
    }
}

/// A reproducible problem instance with the metadata needed to regenerate,
/// start, and report on it.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub family: Family,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub problem: Problem<InstanceObjective>,
    pub reference_optimum: Option<f64>,
    /// SVM labels `a_i ∈ {−1, +1}`.
    pub labels: Option<Vec<f64>>,
    /// Number of negative and positive entries of `D` (non-convex family).
    pub diag_signs: Option<(usize, usize)>,
}

impl GeneratedInstance {
    /// Solver settings used for this family in the benchmark protocol.
    ///
    /// Quadratic families use the rate-mode index rule with the closed-form
    /// quadratic stepsize. The separable family keeps `j` fixed at the index
    /// of smallest `L_i` and takes `γ = ½` Lipschitz steps.
    pub fn protocol_config(&self) -> Ac2cdConfig {
        match self.problem.objective() {
            InstanceObjective::Quadratic(_) => Ac2cdConfig {
                index_rule: IndexRule::RateMode,
                stepsize: StepsizeRule::quadratic(),
                ..Ac2cdConfig::default()
            },
            InstanceObjective::LogExp(f) => {
                let l = f.lipschitz();
                let j = (0..l.len()).fold(0, |best, i| if l[i] < l[best] { i } else { best });
                Ac2cdConfig {
                    index_rule: IndexRule::Fixed(j),
                    stepsize: StepsizeRule::Lipschitz { gamma: 0.5 },
                    ..Ac2cdConfig::default()
                }
            }
        }
    }

    /// The family's prescribed starting point; `seed` picks the random parts.
    ///
    /// Simplex families start at a random vertex, the SVM dual at zero except
    /// for one coordinate of each label, and LogExp at the origin.
    pub fn starting_point(&self, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = self.n;
        let mut x = vec![0.0; n];
        match self.family {
            Family::Chebyshev | Family::Nonconvex => {
                x[rng.random_range(0..n)] = self.problem.level();
            }
            Family::LogExp => {}
            Family::SvmDual => {
                let labels = self.labels.as_deref().unwrap_or(&[]);
                let pos: Vec<usize> = (0..n).filter(|&i| labels[i] > 0.0).collect();
                let neg: Vec<usize> = (0..n).filter(|&i| labels[i] < 0.0).collect();
                if !pos.is_empty() && !neg.is_empty() {
                    let i = pos[rng.random_range(0..pos.len())];
                    let j = neg[rng.random_range(0..neg.len())];
                    let cap = self.problem.bounds().upper(i).finite().unwrap_or(1.0);
                    let t = cap * rng.sample::<f64, _>(rand::distr::Open01);
                    x[i] = t;
                    x[j] = -t;
                }
            }
        }
        x
    }
}
