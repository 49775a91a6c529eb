//! Energy model, suite runner and report emission.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{run_workload, BenchError, BenchmarkId, Profile, RunMode, Shape, Variant, Workload};
use crate::isa::{Sew, VectorConfig};
use crate::timing::{analytic_cycles, TimingConfig};

/// Simulation budget in cycles; larger runs must use analytic mode.
pub const DEFAULT_BUDGET: u64 = 2_000_000_000;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bad power model: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid power model: {0}")]
    Invalid(String),
    #[error("nothing to report")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Whole-system power while each variant runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModel {
    pub scalar_system_watts: f64,
    pub vector_system_watts: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel { scalar_system_watts: 0.270, vector_system_watts: 0.297 }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<(), ReportError> {
        let ok = |w: f64| w > 0.0 && w.is_finite();
        if !ok(self.scalar_system_watts) || !ok(self.vector_system_watts) {
            return Err(ReportError::Invalid("power must be positive".into()));
        }
        if self.vector_system_watts < self.scalar_system_watts {
            return Err(ReportError::Invalid("vector system power below scalar system power".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ReportError> {
        let p: PowerModel = toml::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ReportError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("power model serializes")
    }

    pub fn watts(&self, variant: Variant) -> f64 {
        match variant {
            Variant::Scalar => self.scalar_system_watts,
            Variant::Vector => self.vector_system_watts,
        }
    }
}

/// `E = P · cycles / f`.
pub fn energy_joules(cycles: u64, clock_hz: f64, watts: f64) -> f64 {
    watts * cycles as f64 / clock_hz
}

/// One benchmark at one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub bench: BenchmarkId,
    pub profile: Profile,
    pub mode: RunMode,
    pub sew: u32,
    pub scalar_cycles: Option<u64>,
    pub vector_cycles: Option<u64>,
    pub speedup: Option<f64>,
    pub scalar_energy_j: Option<f64>,
    pub vector_energy_j: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub scalar_verified: Option<bool>,
    pub vector_verified: Option<bool>,
    pub error: Option<String>,
}

impl BenchResult {
    /// Fill in the derived columns from the cycle counts.
    pub fn from_cycles(
        bench: BenchmarkId,
        profile: Profile,
        mode: RunMode,
        sew: Sew,
        scalar_cycles: Option<u64>,
        vector_cycles: Option<u64>,
        power: &PowerModel,
        clock_hz: f64,
    ) -> BenchResult {
        let scalar_energy_j = scalar_cycles.map(|c| energy_joules(c, clock_hz, power.scalar_system_watts));
        let vector_energy_j = vector_cycles.map(|c| energy_joules(c, clock_hz, power.vector_system_watts));
        let speedup = match (scalar_cycles, vector_cycles) {
            (Some(s), Some(v)) if v > 0 => Some(s as f64 / v as f64),
            _ => None,
        };
        let energy_ratio = match (scalar_energy_j, vector_energy_j) {
            (Some(s), Some(v)) if s > 0.0 => Some(v / s),
            _ => None,
        };
        BenchResult {
            bench,
            profile,
            mode,
            sew: sew.bits(),
            scalar_cycles,
            vector_cycles,
            speedup,
            scalar_energy_j,
            vector_energy_j,
            energy_ratio,
            scalar_verified: None,
            vector_verified: None,
            error: None,
        }
    }

    /// False only when a simulated output differed from the oracle.
    pub fn passed(&self) -> bool {
        self.scalar_verified != Some(false) && self.vector_verified != Some(false)
    }
}

/// What to run.
#[derive(Debug, Clone)]
pub struct SuiteSpec {
    pub benches: Vec<BenchmarkId>,
    pub profiles: Vec<Profile>,
    pub variants: Vec<Variant>,
    pub mode: RunMode,
    pub sew: Sew,
    pub seed: u64,
    pub cfg: VectorConfig,
    pub timing: TimingConfig,
    pub power: PowerModel,
    pub budget: u64,
}

fn run_one(spec: &SuiteSpec, bench: BenchmarkId, profile: Profile) -> BenchResult {
    let attempt = || -> Result<BenchResult, BenchError> {
        let shape = Shape::for_profile(bench, profile);
        let mut cycles = [None, None];
        let mut verified = [None, None];
        let mut errors = Vec::new();
        let mut workload = None;
        for (i, v) in Variant::BOTH.into_iter().enumerate() {
            if !spec.variants.contains(&v) {
                continue;
            }
            // the estimate gates simulation before any input is generated
            let estimate = analytic_cycles(bench, shape, spec.sew, v, &spec.cfg, &spec.timing)?;
            if spec.mode == RunMode::Analytic {
                cycles[i] = Some(estimate);
                continue;
            }
            if estimate > spec.budget {
                errors.push(format!("{} {}", v.name(), BenchError::Infeasible { estimate, budget: spec.budget }));
                continue;
            }
            if workload.is_none() {
                workload = Some(Workload::new(bench, shape, spec.sew, spec.seed)?);
            }
            let w = workload.as_ref().expect("built above");
            match run_workload(w, v, spec.mode, &spec.cfg, &spec.timing, spec.budget) {
                Ok(out) => {
                    cycles[i] = Some(out.cycles);
                    verified[i] = out.verified;
                }
                Err(e @ BenchError::Infeasible { .. }) => errors.push(format!("{} {}", v.name(), e)),
                Err(e) => return Err(e),
            }
        }
        let mut r = BenchResult::from_cycles(
            bench,
            profile,
            spec.mode,
            spec.sew,
            cycles[0],
            cycles[1],
            &spec.power,
            spec.timing.clock_hz,
        );
        r.scalar_verified = verified[0];
        r.vector_verified = verified[1];
        r.error = (!errors.is_empty()).then(|| errors.join("; "));
        Ok(r)
    };
    attempt().unwrap_or_else(|e| {
        let mut r = BenchResult::from_cycles(bench, profile, spec.mode, spec.sew, None, None, &spec.power, 1.0);
        r.error = Some(e.to_string());
        r
    })
}

/// Run every (benchmark, profile) pair, in benchmark-major order.
pub fn run_suite(spec: &SuiteSpec) -> Vec<BenchResult> {
    let jobs: Vec<(BenchmarkId, Profile)> =
        spec.benches.iter().flat_map(|b| spec.profiles.iter().map(move |p| (*b, *p))).collect();
    jobs.par_iter().map(|(b, p)| run_one(spec, *b, *p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// `x` to three significant figures.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-3..=4).contains(&mag) {
        return format!("{x:.2e}");
    }
    let decimals = (2 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_else(|| "-".into())
}

fn verdict(r: &BenchResult) -> String {
    if let Some(e) = &r.error {
        return e.clone();
    }
    match (r.scalar_verified, r.vector_verified) {
        (None, None) => "-".into(),
        _ if r.passed() => "ok".into(),
        _ => "MISMATCH".into(),
    }
}

fn table(results: &[BenchResult]) -> String {
    let header = [
        "benchmark", "profile", "scalar cycles", "vector cycles", "speedup", "scalar J", "vector J", "energy", "check",
    ];
    let rows: Vec<[String; 9]> = results
        .iter()
        .map(|r| {
            [
                r.bench.name().to_string(),
                r.profile.name().to_string(),
                opt(r.scalar_cycles, |c| sci(c as f64)),
                opt(r.vector_cycles, |c| sci(c as f64)),
                opt(r.speedup, |s| format!("{}x", sig3(s))),
                opt(r.scalar_energy_j, sci),
                opt(r.vector_energy_j, sci),
                opt(r.energy_ratio, |e| format!("{:.1}%", e * 100.0)),
                verdict(r),
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for row in &rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(width)
            .enumerate()
            .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&header.map(String::from));
    out += &line(&width.map(|w| "-".repeat(w)));
    for row in &rows {
        out += &line(row);
    }
    out
}

/// Render `results` in `format`.
pub fn render(results: &[BenchResult], format: Format) -> Result<String, ReportError> {
    if results.is_empty() {
        return Err(ReportError::Empty);
    }
    Ok(match format {
        Format::Table => table(results),
        Format::Json => serde_json::to_string_pretty(results)? + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in results {
                w.serialize(r)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| ReportError::Io { path: "<csv buffer>".into(), source: e.into_error() })?).expect("csv is utf-8")
        }
    })
}

/// Write the report to `dest`, or standard output when `None`.
pub fn emit_report(results: &[BenchResult], format: Format, dest: Option<&Path>) -> Result<(), ReportError> {
    let text = render(results, format)?;
    match dest {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| ReportError::Io { path: path.display().to_string(), source })
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| ReportError::Io { path: "<stdout>".into(), source }),
    }
}

/// Parse a csv report back into results.
pub fn parse_csv(text: &str) -> Result<Vec<BenchResult>, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<BenchResult>, _>>()?)
}
