//! TOML run configuration.
//!
//! ```toml
//! [model]
//! variant = "baseline"
//! p0 = "1/2"
//! pS = "61/64"
//! Q = "15611/16384"
//! q = "9/256"
//!
//! [congestion]
//! k = "1/3"
//! mode = "differ"
//! scope = "all"          # or "window" (with window = m) or "discounted" (with beta)
//!
//! [run]
//! horizon = 6
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{default_horizon, NumericMode};
use crate::decision::{CongestionMode, CongestionScope, CongestionSpec, DecisionError, Tiebreak};
use crate::numeric::{int, parse_rational, serde_rational, Rational};
use crate::signal_model::{ModelError, ModelParams, SignalModel};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeKind {
    #[default]
    #[serde(alias = "all-predecessors")]
    All,
    Window,
    Discounted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongestionConfig {
    #[serde(with = "serde_rational", default = "zero")]
    pub k: Rational,
    #[serde(default = "differ")]
    pub mode: CongestionMode,
    #[serde(default)]
    pub scope: ScopeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_rational::option")]
    pub beta: Option<Rational>,
    /// Period -> cost for individual players.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, String>,
}

fn zero() -> Rational {
    int(0)
}

fn differ() -> CongestionMode {
    CongestionMode::Differ
}

impl Default for CongestionConfig {
    fn default() -> Self {
        CongestionConfig {
            k: zero(),
            mode: CongestionMode::Differ,
            scope: ScopeKind::All,
            window: None,
            beta: None,
            overrides: BTreeMap::new(),
        }
    }
}

impl CongestionConfig {
    pub fn spec(&self) -> Result<CongestionSpec, ConfigError> {
        let scope = match self.scope {
            ScopeKind::All => CongestionScope::AllPredecessors,
            ScopeKind::Window => CongestionScope::Window(
                self.window.ok_or_else(|| ConfigError::Invalid("scope \"window\" needs `window = m`".into()))?,
            ),
            ScopeKind::Discounted => CongestionScope::Discounted(
                self.beta.clone().ok_or_else(|| ConfigError::Invalid("scope \"discounted\" needs `beta`".into()))?,
            ),
        };
        let mut spec = CongestionSpec::new(self.k.clone(), self.mode, scope)?;
        for (period, k) in &self.overrides {
            let p: usize = period
                .parse()
                .ok()
                .filter(|p| *p >= 1)
                .ok_or_else(|| ConfigError::Invalid(format!("override key `{period}` is not a period")))?;
            let k = parse_rational(k).map_err(|e| ConfigError::Invalid(format!("override for period {p}: {e}")))?;
            spec = spec.with_override(p, k)?;
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub tiebreak: Tiebreak,
    #[serde(default)]
    pub numeric: NumericMode,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub congestion: CongestionConfig,
    #[serde(default)]
    pub run: RunSettings,
}

impl RunConfig {
    pub fn new(model: ModelParams, congestion: CongestionConfig) -> Self {
        RunConfig { model, congestion, run: RunSettings::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn model(&self) -> Result<SignalModel, ConfigError> {
        Ok(SignalModel::new(self.model.clone())?)
    }

    pub fn spec(&self) -> Result<CongestionSpec, ConfigError> {
        self.congestion.spec()
    }

    pub fn horizon(&self) -> usize {
        self.run.horizon.unwrap_or_else(|| default_horizon(self.model.variant))
    }
}

/// Configs shipped with the crate, by name.
pub const BUNDLED: [(&str, &str); 4] = [
    ("example1a", include_str!("../configs/example1a.toml")),
    ("example1b", include_str!("../configs/example1b.toml")),
    ("appendix", include_str!("../configs/appendix.toml")),
    ("herd-witness", include_str!("../configs/herd-witness.toml")),
];

pub fn bundled(name: &str) -> Option<RunConfig> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| RunConfig::from_toml_str(text).expect("bundled configs parse"))
}

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}
