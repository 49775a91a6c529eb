//! Cycle accounting: the scoreboard simulator, closed-form cycle models and
//! parameter calibration.

mod analytic;
mod calibrate;
mod config;
mod simulate;

pub use analytic::analytic_cycles;
pub use calibrate::{calibrate, Calibration, CalibrateError, Grid, Residual, Target, TargetSet};
pub use config::{ConfigError, TimingConfig};
pub use simulate::{
    run_functional, simulate, vector_execute_cycles, vector_use, Mode, SimError, SimOptions, SimResult, StallReason,
    TraceRecord, VecUse, DEFAULT_MAX_CYCLES,
};
