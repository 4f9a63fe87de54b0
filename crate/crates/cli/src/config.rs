//! Run configuration file (TOML). Every field is optional; command-line
//! flags override whatever is set here.

use gridlock_core::dataset::{ColumnMapping, Covariate};
use gridlock_core::stats::{ClusterLevel, Control, Hypothesis};
use gridlock_core::synth::{BehaviorConfig, CovariateMarginals};
use gridlock_core::scenario::HalfPriorRule;
use gridlock_core::Shock;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Table,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub verify: GridSpec,
    pub simulate: SimulateSection,
    pub analyze: AnalyzeSection,
    pub fisher: FisherSection,
    pub power: PowerSection,
    pub balance: BalanceSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

/// Parameter lists for the proposition sweep. Missing lists fall back to
/// the named preset.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// `standard` or `dense`.
    pub preset: Option<String>,
    pub q: Option<Vec<f64>>,
    pub a: Option<Vec<f64>>,
    pub r: Option<Vec<f64>>,
    pub shocks: Option<Vec<Shock>>,
}

impl GridSpec {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read grid {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid grid {}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub counts: Option<[u32; 7]>,
    pub behavior: Option<BehaviorConfig>,
    pub marginals: Option<CovariateMarginals>,
    pub endowment: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    pub data: Option<PathBuf>,
    pub mapping: Option<ColumnMapping>,
    pub hypotheses: Option<Vec<Hypothesis>>,
    /// Subgroup dummies interacted with H3 and H4.
    pub interactions: Option<Vec<Covariate>>,
    pub controls: Option<Vec<Control>>,
    pub cluster: Option<ClusterLevel>,
    pub half_prior: Option<HalfPriorRule>,
    pub bootstrap_reps: Option<usize>,
    pub allow_collinear: Option<bool>,
    pub level: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FisherSection {
    pub data: Option<PathBuf>,
    pub baseline: Option<u8>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub alpha: Option<f64>,
    pub power: Option<f64>,
    pub two_sided: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceSection {
    pub data: Option<PathBuf>,
    pub splits: Option<Vec<Hypothesis>>,
    pub covariates: Option<Vec<Covariate>>,
}
