//! Experiment configuration files.
//!
//! TOML with one table per concern:
//!
//! ```toml
//! [experiment]
//! kind = "validate-theorem1"   # bootstrap | validate-theorem1 | validate-theorem2
//!                              # coverage | clt-check | oracle
//! seed = 7
//! replications = 5             # master seeds per cell
//! output = "out/empirical"
//!
//! [graphon]
//! kind = "constant"            # constant | additive | block (+ matrix = [[..]])
//!
//! [sparsity]
//! kind = "constant"            # constant (c) | power (c, alpha)
//! c = 0.2
//!
//! [grid]
//! n = [100, 400]
//!
//! [motifs]
//! list = ["k2: 2; 0-1"]
//!
//! [plan]
//! replicates = 2000
//! truth_samples = 2000
//! levels = [0.9]
//! ```
//!
//! Every key of `[plan]` is optional. Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bootstrap::BootstrapMethod;
use crate::error::{Error, Result};
use crate::graphon::{GraphonSpec, SparsitySchedule};
use crate::motif::Motif;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Bootstrap,
    ValidateTheorem1,
    ValidateTheorem2,
    Coverage,
    CltCheck,
    Oracle,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Bootstrap,
        ExperimentKind::ValidateTheorem1,
        ExperimentKind::ValidateTheorem2,
        ExperimentKind::Coverage,
        ExperimentKind::CltCheck,
        ExperimentKind::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Bootstrap => "bootstrap",
            ExperimentKind::ValidateTheorem1 => "validate-theorem1",
            ExperimentKind::ValidateTheorem2 => "validate-theorem2",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::CltCheck => "clt-check",
            ExperimentKind::Oracle => "oracle",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let known: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.as_str()).collect();
            Error::config("experiment.kind", format!("unknown kind `{s}`; expected one of {}", known.join(", ")))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotifSection {
    pub list: Vec<String>,
}

impl Default for MotifSection {
    fn default() -> Self {
        MotifSection {
            list: vec!["k2: 2; 0-1".into()],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    /// Bootstrap method for `bootstrap`; coverage uses `methods`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<BootstrapMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<BootstrapMethod>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    /// Monte-Carlo draws for bootstrap centers; absent means exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// Edge probabilities for the constant-graphon providers.
    #[serde(default = "default_oracle_rhos")]
    pub rhos: Vec<f64>,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            rhos: default_oracle_rhos(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Edge-list file used by the `bootstrap` kind instead of a sampled graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default = "default_graphon")]
    pub graphon: GraphonSpec,
    #[serde(default = "default_sparsity")]
    pub sparsity: SparsitySchedule,
    pub grid: GridSection,
    #[serde(default)]
    pub motifs: MotifSection,
    #[serde(default)]
    pub plan: PlanSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub data: DataSection,
}

fn one() -> usize {
    1
}

fn default_oracle_rhos() -> Vec<f64> {
    vec![0.3, 0.7]
}

fn default_graphon() -> GraphonSpec {
    GraphonSpec::Constant
}

fn default_sparsity() -> SparsitySchedule {
    SparsitySchedule::constant(0.2)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| field_at(text, s.start)).unwrap_or_else(|| "config".into());
            Error::config(field, e.message().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.experiment.kind.parse()
    }

    pub fn motifs(&self) -> Result<Vec<Motif>> {
        self.motifs
            .list
            .iter()
            .map(|s| Motif::parse(s).map_err(|e| Error::config("motifs.list", e.to_string())))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.kind()?;
        if self.experiment.replications == 0 {
            return Err(Error::config("experiment.replications", "must be at least 1"));
        }
        self.graphon.validate().map_err(|e| Error::config("graphon", e.to_string()))?;
        self.sparsity.validate().map_err(|e| Error::config("sparsity", e.to_string()))?;
        let n = &self.grid.n;
        if n.is_empty() {
            return Err(Error::config("grid.n", "needs at least one graph size"));
        }
        if n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("grid.n", "sizes must be strictly ascending"));
        }
        if n[0] < 2 {
            return Err(Error::config("grid.n", "graph sizes must be at least 2"));
        }
        if self.motifs()?.is_empty() {
            return Err(Error::config("motifs.list", "needs at least one motif"));
        }
        for &level in self.levels() {
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::config("plan.levels", format!("level {level} is outside (0, 1)")));
            }
        }
        for (field, v) in [
            ("plan.replicates", self.plan.replicates),
            ("plan.truth_samples", self.plan.truth_samples),
            ("plan.simulations", self.plan.simulations),
            ("plan.restarts", self.plan.restarts),
            ("plan.center_samples", self.plan.center_samples),
        ] {
            if v == Some(0) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        for &rho in &self.oracle.rhos {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(Error::config("oracle.rhos", format!("{rho} is outside (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> &[f64] {
        self.plan.levels.as_deref().unwrap_or(&[0.9])
    }

    pub fn replicates(&self) -> usize {
        self.plan.replicates.unwrap_or(crate::bootstrap::DEFAULT_REPLICATES)
    }

    pub fn truth_samples(&self) -> usize {
        self.plan.truth_samples.unwrap_or(2000)
    }

    pub fn simulations(&self) -> usize {
        self.plan.simulations.unwrap_or(200)
    }
}

/// Dotted path of the innermost table key at or before `offset`.
fn field_at(text: &str, offset: usize) -> String {
    let mut section = String::new();
    let mut key = String::new();
    let mut pos = 0;
    for line in text.split_inclusive('\n') {
        if pos > offset {
            break;
        }
        let t = line.trim();
        if t.starts_with('[') && t.ends_with(']') {
            section = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = t.split_once('=') {
            key = k.trim().to_string();
        }
        pos += line.len();
    }
    match (section.is_empty(), key.is_empty()) {
        (true, true) => "config".into(),
        (true, false) => key,
        (false, true) => section,
        (false, false) => format!("{section}.{key}"),
    }
}
