//! Pure analyses over power, temperature and counter traces.
//!
//! Nothing here performs I/O; every function takes immutable inputs and can
//! be called from any thread.

mod benchmark;
mod boot;
mod counters;
mod decompose;
mod efficiency;
mod table;
mod thermal;
mod window;

use thiserror::Error;

use crate::telemetry::{RailName, TelemetryError};

pub use benchmark::{parse_hpl_output, parse_stream_output};
pub use boot::{segment_boot, segment_boot_with, BootOptions, BootSegmentation};
pub use counters::{rate_from_counters, CounterPoint};
pub use decompose::{decompose_levels, decompose_power, leakage_share, LeakageShare, PowerDecomposition};
pub use efficiency::{
    bandwidth_efficiency, flops_efficiency, scaling_summary, BenchmarkRecord, Efficiency, MachineSpec,
    Runtime, ScalingSummary, Throughput,
};
pub use table::{workload_table, workload_table_from_means, WorkloadPowerTable};
pub use thermal::{detect_thermal_events, EventKind, TemperatureTrace, ThermalEvent, ThermalThresholds};
pub use window::{window_average, window_points};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("empty trace")]
    EmptyTrace,
    #[error("pll never activates (threshold {threshold_mw} mW)")]
    NoPllActivation { threshold_mw: f64 },
    #[error("trace too short: {0}")]
    TooShort(String),
    #[error("power levels not monotone: {0}")]
    NonMonotone(String),
    #[error("missing rail {0}")]
    MissingRail(RailName),
    #[error("unit mismatch: {0}")]
    WrongUnit(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
}
