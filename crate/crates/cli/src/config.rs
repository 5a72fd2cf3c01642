//! The JSON configuration document.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use demonlab_core::{Efficiency, Normalization, Source};
use demonlab_mc::RunConfig;

use crate::error::HarnessError;

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_SLOTS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const SEED_ENV: &str = "DEMONLAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Analytic,
    MonteCarlo,
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        self != Engine::MonteCarlo
    }

    pub fn monte_carlo(self) -> bool {
        self != Engine::Analytic
    }
}

/// One curve of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub source: Source,
    pub normalization: Normalization,
    pub eps2: Efficiency,
    /// Also compute the click/photon-number mutual information.
    #[serde(default)]
    pub information: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub slots: u64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { slots: DEFAULT_SLOTS, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

/// Reflectivities `r²` from 0 to 0.5 in steps of 0.025.
pub fn default_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 40.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub version: u32,
    pub series: Vec<SeriesSpec>,
    #[serde(default = "default_grid")]
    pub r2_grid: Vec<f64>,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub outputs: Outputs,
}

impl SweepConfig {
    pub fn new(series: Vec<SeriesSpec>) -> Self {
        Self {
            version: CONFIG_VERSION,
            series,
            r2_grid: default_grid(),
            engine: Engine::default(),
            mc: McSettings::default(),
            outputs: Outputs::default(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        check_version(self.version)?;
        if self.series.is_empty() {
            return Err(HarnessError::Config("`series` must not be empty".into()));
        }
        if self.r2_grid.is_empty() {
            return Err(HarnessError::Config("`r2_grid` must not be empty".into()));
        }
        if let Some(bad) = self.r2_grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(HarnessError::Config(format!("r² = {bad} lies outside [0, 1]")));
        }
        if self.engine.monte_carlo() && self.mc.slots == 0 {
            return Err(HarnessError::Config("`mc.slots` must be at least 1".into()));
        }
        Ok(())
    }
}

/// A single Monte Carlo campaign (`mc` subcommand).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub version: u32,
    pub run: RunConfig,
    /// Combine bar, cross and feed-forward runs into a power estimate;
    /// otherwise the configured single run is reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
}

impl McConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        check_version(self.version)?;
        self.run.validate().map_err(|e| HarnessError::Config(e.to_string()))
    }
}

fn check_version(v: u32) -> Result<(), HarnessError> {
    if v != CONFIG_VERSION {
        return Err(HarnessError::Config(format!(
            "unsupported config version {v} (expected {CONFIG_VERSION})"
        )));
    }
    Ok(())
}

/// Parses a JSON document, reporting the failing field path and position.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, HarnessError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        HarnessError::Parse {
            field: path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

/// `DEMONLAB_SEED` if set and valid.
pub fn env_seed() -> Result<Option<u64>, HarnessError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| HarnessError::Config(format!("{SEED_ENV}={v:?} is not a 64-bit seed"))),
        Err(_) => Ok(None),
    }
}
