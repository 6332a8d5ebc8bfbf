//! Declarative experiment configuration, read from TOML and checked
//! before any work starts. CLI flags may override individual values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::SweepConfig;
use crate::forecast::{Method, Segmentation};

/// Environment variable holding the default data directory; relative data
/// paths resolve against it.
pub const DATA_DIR_ENV: &str = "DPLF_DATA_DIR";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSection,
    pub forecast: ForecastSection,
    pub privacy: PrivacySection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub loads: PathBuf,
    pub temperatures: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastSection {
    pub methods: Vec<Method>,
    #[serde(default = "default_horizon")]
    pub horizon_hours: usize,
}

fn default_horizon() -> usize {
    168
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacySection {
    /// Log-spaced defaults mirror the published grid: 10^4, 10^4.75, 10^5.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_delta_fs")]
    pub delta_fs: Vec<f64>,
    #[serde(default = "default_delta_tilde")]
    pub delta_tilde: f64,
    /// Composition steps; omitted means the training-timestamp count.
    #[serde(default)]
    pub k: Option<u64>,
}

fn default_lambdas() -> Vec<f64> {
    vec![10_000.0, 56_234.0, 100_000.0]
}

fn default_delta_fs() -> Vec<f64> {
    crate::ingest::sensitivity_catalog()
        .entries
        .iter()
        .map(|e| e.delta_f)
        .collect()
}

fn default_delta_tilde() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    #[serde(default = "default_utility_limit")]
    pub utility_limit_kw: f64,
}

fn default_utility_limit() -> f64 {
    12_000.0
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.to_sweep_config().validate()
    }

    /// Resolves a data path against `DPLF_DATA_DIR` when it is relative and
    /// the variable is set.
    pub fn resolve_data_path(&self, path: &Path) -> PathBuf {
        if path.is_relative() {
            if let Ok(base) = std::env::var(DATA_DIR_ENV) {
                return Path::new(&base).join(path);
            }
        }
        path.to_path_buf()
    }

    pub fn loads_path(&self) -> PathBuf {
        self.resolve_data_path(&self.data.loads)
    }

    pub fn temperatures_path(&self) -> PathBuf {
        self.resolve_data_path(&self.data.temperatures)
    }

    pub fn to_sweep_config(&self) -> SweepConfig {
        let mut sweep = SweepConfig::new(
            self.forecast.methods.clone(),
            self.privacy.lambdas.clone(),
            self.privacy.delta_fs.clone(),
            self.run.seeds.clone(),
        );
        sweep.delta_tilde = self.privacy.delta_tilde;
        sweep.k_override = self.privacy.k;
        sweep.horizon_hours = self.forecast.horizon_hours;
        sweep.utility_limit_kw = self.run.utility_limit_kw;
        sweep.segmentation = Segmentation::default();
        sweep
    }
}
