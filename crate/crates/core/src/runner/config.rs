use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RunError;
use crate::bau::BauConfig;
use crate::calendar::SNAPSHOT_YEARS;
use crate::cooling::{CoolingConfig, CoolingScenario};
use crate::ev::{ChargingScheme, EvConfig};
use crate::gdp::{GdpConfig, GdpScenario};
use crate::hourly::WeatherScaling;

/// Everything that controls a run. Missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Input directory, relative to the config file when loaded from one.
    pub data_dir: PathBuf,
    pub seed: u64,
    pub gdp: Vec<GdpScenario>,
    pub charging: Vec<ChargingScheme>,
    pub cooling: Vec<CoolingScenario>,
    pub snapshot_years: Vec<i32>,
    /// Year written to the detailed files.
    pub detail_year: i32,
    pub noise: bool,
    pub weather_scaling: WeatherScaling,
    pub bau: BauConfig,
    pub gdp_growth: GdpConfig,
    pub cooling_model: CoolingConfig,
    pub ev_model: EvConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: PathBuf::from("."),
            seed: 42,
            gdp: GdpScenario::ALL.to_vec(),
            charging: ChargingScheme::ALL.to_vec(),
            cooling: CoolingScenario::ALL.to_vec(),
            snapshot_years: SNAPSHOT_YEARS.to_vec(),
            detail_year: 2050,
            noise: true,
            weather_scaling: WeatherScaling::default(),
            bau: BauConfig::default(),
            gdp_growth: GdpConfig::default(),
            cooling_model: CoolingConfig::default(),
            ev_model: EvConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        if config.data_dir.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            config.data_dir = base.join(&config.data_dir);
        }
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<(), RunError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| RunError::Config(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| RunError::io(path, e))
    }

    /// Digest of the settings that affect outputs. The data directory is
    /// excluded so that relocating inputs keeps the digest.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.data_dir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.snapshot_years.is_empty() {
            return Err(RunError::Config("snapshot_years is empty".into()));
        }
        if !self.snapshot_years.contains(&self.detail_year) {
            return Err(RunError::Config(format!("detail year {} is not a snapshot year", self.detail_year)));
        }
        let last = *self.snapshot_years.iter().max().unwrap();
        if last > self.gdp_growth.end_year || *self.snapshot_years.iter().min().unwrap() < self.gdp_growth.anchor_year {
            return Err(RunError::Config(format!(
                "snapshot years must lie in {}..={}",
                self.gdp_growth.anchor_year, self.gdp_growth.end_year
            )));
        }
        if self.gdp.is_empty() || self.charging.is_empty() || self.cooling.is_empty() {
            return Err(RunError::Config("every scenario axis needs at least one value".into()));
        }
        Ok(())
    }
}
