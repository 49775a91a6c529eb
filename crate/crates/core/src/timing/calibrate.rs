//! Grid-search fit of the free timing parameters to measured cycle counts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::{BenchError, BenchmarkId, Profile, Shape, Variant};
use crate::isa::{Sew, VectorConfig};
use crate::timing::{analytic_cycles, TimingConfig};

/// One cycle count to fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub bench: BenchmarkId,
    pub profile: Profile,
    pub variant: Variant,
    pub cycles: f64,
}

/// Contents of a targets file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSet {
    #[serde(rename = "target")]
    pub targets: Vec<Target>,
}

#[derive(Debug, thiserror::Error)]
pub enum CalibrateError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bad targets file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("no targets")]
    Empty,
    #[error("target for {bench} {profile} has non-positive cycles")]
    BadTarget { bench: BenchmarkId, profile: Profile },
    #[error("empty grid axis {0}")]
    EmptyAxis(&'static str),
    #[error(transparent)]
    Bench(#[from] BenchError),
}

impl TargetSet {
    pub fn from_toml_str(text: &str) -> Result<Self, CalibrateError> {
        let set: TargetSet = toml::from_str(text)?;
        set.check()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, CalibrateError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CalibrateError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("targets serialize")
    }

    fn check(&self) -> Result<(), CalibrateError> {
        if self.targets.is_empty() {
            return Err(CalibrateError::Empty);
        }
        for t in &self.targets {
            if !(t.cycles > 0.0 && t.cycles.is_finite()) {
                return Err(CalibrateError::BadTarget { bench: t.bench, profile: t.profile });
            }
        }
        Ok(())
    }
}

/// Candidate values of each free parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub mem_latency: Vec<u64>,
    pub bus_initiation: Vec<u64>,
    pub mul_cpi: Vec<u64>,
    pub div_cpi: Vec<u64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            mem_latency: (0..=40).collect(),
            bus_initiation: (0..=40).collect(),
            mul_cpi: (1..=8).collect(),
            div_cpi: vec![2, 8, 16, 32, 64],
        }
    }
}

/// Fit against one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub target: Target,
    pub model: u64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub timing: TimingConfig,
    pub max_rel_error: f64,
    pub residuals: Vec<Residual>,
}

fn rel(model: u64, target: f64) -> f64 {
    (model as f64 - target).abs() / target
}

/// Whether any target's cycle count moves when `bump` is applied to `base`.
fn sensitive(
    shaped: &[(Target, Shape)],
    base: &TimingConfig,
    bump: impl Fn(&mut TimingConfig),
    cfg: &VectorConfig,
    sew: Sew,
) -> Result<bool, CalibrateError> {
    let mut moved = *base;
    bump(&mut moved);
    for (t, shape) in shaped {
        if analytic_cycles(t.bench, *shape, sew, t.variant, cfg, base)?
            != analytic_cycles(t.bench, *shape, sew, t.variant, cfg, &moved)?
        {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Fit `mem_latency`, `bus_initiation`, `mul_cpi` and `div_cpi` to `targets`.
///
/// Minimizes the largest relative error, then the summed error; remaining
/// ties keep the value closest to `base`, so parameters no target depends on
/// are left at their `base` values.
pub fn calibrate(
    targets: &TargetSet,
    base: &TimingConfig,
    grid: &Grid,
    cfg: &VectorConfig,
    sew: Sew,
) -> Result<Calibration, CalibrateError> {
    targets.check()?;
    for (name, axis) in [
        ("mem_latency", &grid.mem_latency),
        ("bus_initiation", &grid.bus_initiation),
        ("mul_cpi", &grid.mul_cpi),
        ("div_cpi", &grid.div_cpi),
    ] {
        if axis.is_empty() {
            return Err(CalibrateError::EmptyAxis(name));
        }
    }
    let shaped: Vec<(Target, Shape)> =
        targets.targets.iter().map(|t| (*t, Shape::for_profile(t.bench, t.profile))).collect();
    let uses_mul = sensitive(&shaped, base, |c| c.mul_cpi += 1, cfg, sew)?;
    let uses_div = sensitive(&shaped, base, |c| c.div_cpi += 1, cfg, sew)?;
    let mul_axis = if uses_mul { grid.mul_cpi.clone() } else { vec![base.mul_cpi] };
    let div_axis = if uses_div { grid.div_cpi.clone() } else { vec![base.div_cpi] };

    let distance = |c: &TimingConfig| {
        base.mem_latency.abs_diff(c.mem_latency)
            + base.bus_initiation.abs_diff(c.bus_initiation)
            + base.mul_cpi.abs_diff(c.mul_cpi)
            + base.div_cpi.abs_diff(c.div_cpi)
    };

    let mut best: Option<(f64, f64, u64, TimingConfig)> = None;
    for &mem_latency in &grid.mem_latency {
        for &bus_initiation in &grid.bus_initiation {
            for &mul_cpi in &mul_axis {
                for &div_cpi in &div_axis {
                    let c = TimingConfig { mem_latency, bus_initiation, mul_cpi, div_cpi, ..*base };
                    let bound = best.as_ref().map_or(f64::INFINITY, |b| b.0);
                    let mut worst = 0.0f64;
                    let mut sum = 0.0;
                    let mut pruned = false;
                    for (t, shape) in &shaped {
                        let e = rel(analytic_cycles(t.bench, *shape, sew, t.variant, cfg, &c)?, t.cycles);
                        worst = worst.max(e);
                        sum += e;
                        if worst > bound {
                            pruned = true;
                            break;
                        }
                    }
                    if pruned {
                        continue;
                    }
                    let key = (worst, sum, distance(&c));
                    let better = match &best {
                        None => true,
                        Some((w, s, d, _)) => key < (*w, *s, *d),
                    };
                    if better {
                        best = Some((key.0, key.1, key.2, c));
                    }
                }
            }
        }
    }
    let (max_rel_error, _, _, timing) = best.expect("grid is non-empty");
    let residuals = shaped
        .iter()
        .map(|(t, shape)| {
            let model = analytic_cycles(t.bench, *shape, sew, t.variant, cfg, &timing)?;
            Ok(Residual { target: *t, model, rel_error: rel(model, t.cycles) })
        })
        .collect::<Result<Vec<_>, CalibrateError>>()?;
    Ok(Calibration { timing, max_rel_error, residuals })
}
