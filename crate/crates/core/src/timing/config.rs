use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memory_unit::BusModel;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("invalid timing configuration: {0}")]
    Invalid(String),
}

/// Cycle-cost parameters for both cores. Every field has a default, so a
/// TOML file only needs the keys it overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    pub clock_hz: f64,
    pub alu_cpi: u64,
    pub mul_cpi: u64,
    pub div_cpi: u64,
    pub branch_taken_cpi: u64,
    pub branch_not_taken_cpi: u64,
    pub jump_cpi: u64,
    /// Scalar load/store latency; a scalar access costs `1 + mem_latency`.
    pub mem_latency: u64,
    /// Cycles before the first beat of a vector burst.
    pub bus_initiation: u64,
    /// Decode, operand fetch, execute, write-back.
    pub pipeline_depth: u64,
    pub vsetvli_cycles: u64,
    pub dispatch_overhead: u64,
    /// Add `ceil(log2 vl)` execute cycles to reductions.
    pub reduction_tree: bool,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            clock_hz: 1.0e8,
            alu_cpi: 1,
            mul_cpi: 3,
            div_cpi: 32,
            branch_taken_cpi: 3,
            branch_not_taken_cpi: 1,
            jump_cpi: 2,
            mem_latency: 20,
            bus_initiation: 20,
            pipeline_depth: 4,
            vsetvli_cycles: 1,
            dispatch_overhead: 0,
            reduction_tree: true,
        }
    }
}

impl TimingConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.clock_hz > 0.0 && self.clock_hz.is_finite()) {
            return Err(ConfigError::Invalid(format!("clock_hz must be positive, got {}", self.clock_hz)));
        }
        if self.pipeline_depth != 4 {
            return Err(ConfigError::Invalid("only the 4-stage vector pipeline is modelled".into()));
        }
        Ok(())
    }

    pub fn load_cycles(&self) -> u64 {
        1 + self.mem_latency
    }

    pub fn store_cycles(&self) -> u64 {
        1 + self.mem_latency
    }

    pub fn bus(&self) -> BusModel {
        BusModel { beat_width_bits: 64, initiation_latency_cycles: self.bus_initiation }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: TimingConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: "<string>".into(), msg: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("timing config always serialises")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ConfigError::Parse { msg, .. } => ConfigError::Parse { path: path.display().to_string(), msg },
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_toml_string())
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })
    }
}
