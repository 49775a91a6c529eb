//! Locating timing, power and target files.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use arrow_core::report::PowerModel;
use arrow_core::timing::{TargetSet, TimingConfig};

/// Directory searched for `timing.toml`, `power.toml` and `targets.toml`
/// when no explicit path is given.
pub const CONFIG_DIR_ENV: &str = "ARROW_SIM_CONFIG_DIR";

pub const TIMING_FILE: &str = "timing.toml";
pub const POWER_FILE: &str = "power.toml";
pub const TARGETS_FILE: &str = "targets.toml";

const EMBEDDED_TIMING: &str = include_str!("../../../config/timing.toml");
const EMBEDDED_POWER: &str = include_str!("../../../config/power.toml");
const EMBEDDED_TARGETS: &str = include_str!("../../../config/targets.toml");

/// Where a configuration came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    File(PathBuf),
    Embedded(&'static str),
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::File(p) => write!(f, "{}", p.display()),
            Source::Embedded(name) => write!(f, "built-in {name}"),
        }
    }
}

/// An explicit path wins; otherwise `name` inside the config directory if it
/// exists there; otherwise the built-in copy.
pub fn resolve(explicit: Option<&Path>, name: &'static str, dir: Option<&Path>) -> Source {
    if let Some(p) = explicit {
        return Source::File(p.to_path_buf());
    }
    if let Some(candidate) = dir.map(|d| d.join(name)).filter(|c| c.is_file()) {
        return Source::File(candidate);
    }
    Source::Embedded(name)
}

pub fn config_dir() -> Option<PathBuf> {
    std::env::var_os(CONFIG_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn load_timing(explicit: Option<&Path>) -> Result<(TimingConfig, Source)> {
    let src = resolve(explicit, TIMING_FILE, config_dir().as_deref());
    let cfg = match &src {
        Source::File(p) => TimingConfig::load(p)?,
        Source::Embedded(_) => TimingConfig::from_toml_str(EMBEDDED_TIMING).context("built-in timing.toml")?,
    };
    Ok((cfg, src))
}

pub fn load_power(explicit: Option<&Path>) -> Result<(PowerModel, Source)> {
    let src = resolve(explicit, POWER_FILE, config_dir().as_deref());
    let power = match &src {
        Source::File(p) => PowerModel::load(p)?,
        Source::Embedded(_) => PowerModel::from_toml_str(EMBEDDED_POWER).context("built-in power.toml")?,
    };
    Ok((power, src))
}

pub fn load_targets(explicit: Option<&Path>) -> Result<(TargetSet, Source)> {
    let src = resolve(explicit, TARGETS_FILE, config_dir().as_deref());
    let set = match &src {
        Source::File(p) => TargetSet::load(p)?,
        Source::Embedded(_) => TargetSet::from_toml_str(EMBEDDED_TARGETS).context("built-in targets.toml")?,
    };
    Ok((set, src))
}
