//! Experiment configuration and its TOML file format.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ac2cd_core::suite::{
    gen_chebyshev, gen_logexp, gen_nonconvex, load_svm_dual, read_instance, toy_svm, Family, GeneratedInstance,
    LogExpRegime,
};
use ac2cd_core::{IndexRule, StepsizeRule};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub stop: StopPolicy,
    #[serde(default)]
    pub repetitions: Repetitions,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(rename = "method", default = "default_methods")]
    pub methods: Vec<MethodSpec>,
}

fn default_methods() -> Vec<MethodSpec> {
    [MethodKind::Ac2cd, MethodKind::RcdUnif, MethodKind::Mvp].into_iter().map(MethodSpec::new).collect()
}

/// Either a generated instance (family, sizes, seed) or a file.
///
/// `path` names an instance file written by `gen`, or for `family = "svm"` a
/// dataset in the sparse `label index:value` text format. Without a path the
/// SVM family uses the bundled toy dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// LogExp coefficient regime, 1 or 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<u8>,
    /// Fraction of negative diagonal entries for the non-convex family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neg_fraction: Option<f64>,
    /// Box constant of the SVM dual.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svm_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopPolicy {
    pub epsilon: f64,
    /// Normalized error at which a baseline reaches the AC2CD objective.
    pub nu: f64,
    pub max_outer: usize,
    /// Inner steps allowed to each baseline run.
    pub inner_budget: usize,
}

impl Default for StopPolicy {
    fn default() -> Self {
        Self { epsilon: 0.1, nu: 1e-6, max_outer: 100_000, inner_budget: 1_000_000 }
    }
}

/// Starting points: `seeds` when given, else `count` seeds from `start_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Repetitions {
    pub count: usize,
    pub start_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
}

impl Default for Repetitions {
    fn default() -> Self {
        Self { count: 1, start_seed: 1, seeds: None }
    }
}

impl Repetitions {
    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.count as u64).map(|r| self.start_seed + r).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Include the wall-time column in traces and summaries.
    pub with_time: bool,
    /// Write normalized error curves for convex runs.
    pub curves: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), with_time: true, curves: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Ac2cd,
    RcdUnif,
    RcdLips,
    Mvp,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Ac2cd => "ac2cd",
            MethodKind::RcdUnif => "rcd_unif",
            MethodKind::RcdLips => "rcd_lips",
            MethodKind::Mvp => "mvp",
        }
    }
}

impl FromStr for MethodKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "ac2cd" => Ok(MethodKind::Ac2cd),
            "rcd_unif" | "rcd" => Ok(MethodKind::RcdUnif),
            "rcd_lips" => Ok(MethodKind::RcdLips),
            "mvp" => Ok(MethodKind::Mvp),
            other => Err(CliError::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepsizeName {
    Armijo,
    Lipschitz,
    Quadratic,
    Exact,
}

impl FromStr for StepsizeName {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "armijo" => Ok(StepsizeName::Armijo),
            "lipschitz" => Ok(StepsizeName::Lipschitz),
            "quadratic" => Ok(StepsizeName::Quadratic),
            "exact" => Ok(StepsizeName::Exact),
            other => Err(CliError::Config(format!("unknown stepsize `{other}`"))),
        }
    }
}

impl StepsizeName {
    pub fn rule(self, gamma: Option<f64>) -> StepsizeRule {
        match self {
            StepsizeName::Armijo => match (StepsizeRule::armijo(), gamma) {
                (StepsizeRule::Armijo { delta, a_lower, a_upper, .. }, Some(gamma)) => {
                    StepsizeRule::Armijo { delta, gamma, a_lower, a_upper }
                }
                (rule, _) => rule,
            },
            StepsizeName::Lipschitz => StepsizeRule::Lipschitz { gamma: gamma.unwrap_or(0.5) },
            StepsizeName::Quadratic => StepsizeRule::quadratic(),
            StepsizeName::Exact => StepsizeRule::exact(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexRuleName {
    Threshold,
    Rate,
    Fixed,
}

/// One method of the comparison. Unset fields take the family's protocol
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepsize: Option<StepsizeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_rule: Option<IndexRuleName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer: Option<usize>,
}

impl MethodSpec {
    pub fn new(name: MethodKind) -> Self {
        Self { name, stepsize: None, gamma: None, tau: None, index_rule: None, fixed_index: None, max_outer: None }
    }

    /// The index rule requested here, if any.
    pub fn index_rule(&self, protocol: IndexRule) -> Result<Option<IndexRule>, CliError> {
        Ok(match (self.index_rule, self.fixed_index) {
            (None, None) => None,
            (None | Some(IndexRuleName::Fixed), Some(j)) => Some(IndexRule::Fixed(j)),
            (Some(IndexRuleName::Fixed), None) => match protocol {
                IndexRule::Fixed(j) => Some(IndexRule::Fixed(j)),
                _ => return Err(CliError::Config("index_rule = \"fixed\" needs fixed_index".into())),
            },
            (Some(IndexRuleName::Threshold), _) => Some(IndexRule::ThresholdAny),
            (Some(IndexRuleName::Rate), _) => Some(IndexRule::RateMode),
        })
    }
}

impl ExperimentConfig {
    /// Default configuration for a family at desk-scale dimensions.
    pub fn for_family(family: Family) -> Self {
        let (n, m, regime, neg_fraction) = match family {
            Family::Chebyshev => (Some(500), Some(50), None, None),
            Family::LogExp => (Some(1000), None, Some(1), None),
            Family::Nonconvex => (Some(300), Some(300), None, Some(0.5)),
            Family::SvmDual => (None, None, None, None),
        };
        let mut cfg = Self {
            instance: InstanceSpec {
                family: family.name().to_string(),
                n,
                m,
                seed: 0,
                regime,
                neg_fraction,
                svm_c: None,
                path: None,
            },
            stop: StopPolicy::default(),
            repetitions: Repetitions::default(),
            output: OutputSpec::default(),
            methods: default_methods(),
        };
        if family == Family::Nonconvex {
            cfg.repetitions.count = 10;
        }
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn family(&self) -> Result<Family, CliError> {
        self.instance.family.parse().map_err(|e: ac2cd_core::suite::SuiteError| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.family()?;
        if self.methods.is_empty() {
            return bad("at least one [[method]] is required".into());
        }
        for (i, a) in self.methods.iter().enumerate() {
            if self.methods[..i].iter().any(|b| b.name == a.name) {
                return bad(format!("method `{}` listed twice", a.name.name()));
            }
        }
        if self.repetitions.seed_list().is_empty() {
            return bad("repetitions must contain at least one start".into());
        }
        if !(self.stop.epsilon > 0.0) || !(self.stop.nu >= 0.0) {
            return bad("stop.epsilon must be positive and stop.nu nonnegative".into());
        }
        if self.stop.max_outer == 0 || self.stop.inner_budget == 0 {
            return bad("stop budgets must be positive".into());
        }
        Ok(())
    }

    /// Builds or loads the instance.
    pub fn build_instance(&self) -> Result<GeneratedInstance, CliError> {
        let spec = &self.instance;
        let family = self.family()?;
        if let Some(path) = &spec.path {
            if family == Family::SvmDual && !is_instance_file(path) {
                return Ok(load_svm_dual(path, spec.svm_c.unwrap_or(1.0))?);
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let inst = read_instance(&text)?;
            if inst.family != family {
                return Err(CliError::Config(format!("{} holds a {} instance, not {family}", path.display(), inst.family)));
            }
            return Ok(inst);
        }
        let need = |v: Option<usize>, what: &str| {
            v.ok_or_else(|| CliError::Config(format!("instance.{what} is required for the {family} family")))
        };
        Ok(match family {
            Family::Chebyshev => gen_chebyshev(need(spec.n, "n")?, need(spec.m, "m")?, spec.seed),
            Family::LogExp => {
                let regime = LogExpRegime::from_index(spec.regime.unwrap_or(1))
                    .ok_or_else(|| CliError::Config("instance.regime must be 1 or 2".into()))?;
                gen_logexp(need(spec.n, "n")?, spec.seed, regime)
            }
            Family::Nonconvex => {
                gen_nonconvex(need(spec.n, "n")?, need(spec.m, "m")?, spec.neg_fraction.unwrap_or(0.5), spec.seed)
            }
            Family::SvmDual => match spec.svm_c {
                None | Some(1.0) => toy_svm(),
                Some(c) => ac2cd_core::suite::svm_dual_from_text(ac2cd_core::suite::TOY_SVM_DATA, c)?,
            },
        })
    }
}

fn is_instance_file(path: &Path) -> bool {
    std::fs::read_to_string(path).map(|t| t.starts_with("ac2cd-instance")).unwrap_or(false)
}
