//! Scenario configuration file: flat TOML keys, unknown keys rejected.
//!
//! ```toml
//! n_samples = 1600
//! osf = 4
//! snr_db = -10.0
//! # band edges default to ±0.5/osf
//! f_low = -0.125
//! f_high = 0.125
//! noise = "white"        # or "lowpass"
//! noise_psd_bins = 128   # resolution of the lowpass shape
//! noise_power = 1.0
//! uncertainty_db = 0.0
//! seed = 1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{NoiseModel, NoisePsdShape, ScenarioConfig, DEFAULT_SHAPE_BINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    White,
    Lowpass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n_samples: usize,
    pub osf: usize,
    pub snr_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_high: Option<f64>,
    #[serde(default = "default_noise")]
    pub noise: NoiseKind,
    #[serde(default = "default_bins")]
    pub noise_psd_bins: usize,
    #[serde(default = "default_power")]
    pub noise_power: f64,
    #[serde(default)]
    pub uncertainty_db: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_noise() -> NoiseKind {
    NoiseKind::White
}

fn default_bins() -> usize {
    DEFAULT_SHAPE_BINS
}

fn default_power() -> f64 {
    1.0
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_scenario(&self) -> Result<ScenarioConfig> {
        if self.osf < 1 {
            return Err(Error::Config("osf must be >= 1".into()));
        }
        let mut cfg = ScenarioConfig::white(self.n_samples, self.osf, self.snr_db);
        let (lo, hi) = cfg.band;
        cfg.band = (self.f_low.unwrap_or(lo), self.f_high.unwrap_or(hi));
        cfg.noise = match self.noise {
            NoiseKind::White => NoiseModel::White,
            NoiseKind::Lowpass => NoiseModel::Colored(
                NoisePsdShape::default_lowpass(self.noise_psd_bins)
                    .map_err(|e| Error::Config(e.to_string()))?,
            ),
        };
        cfg.noise_power = self.noise_power;
        cfg.uncertainty_db = self.uncertainty_db;
        cfg.seed = self.seed;
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}
