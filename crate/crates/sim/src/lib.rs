//! Synthetic cluster: scenario → per-node trace bundle → replay.
//!
//! Rail levels follow the reference power table, boot follows the reference
//! boot schedule, and everything else (noise, thermal scripts, counter rates)
//! is a scenario input.

mod bundle;
mod generate;
mod replay;
mod scenario;

use thiserror::Error;

pub use bundle::{read_bundle, write_bundle, Bundle, Manifest, NodeManifest, NodeTrace, PhaseRecord, Signal, SignalRecord};
pub use generate::generate;
pub use replay::{replay, ReplayReport, Speed};
pub use scenario::{CounterSim, Phase, ProfileName, SimScenario, ThermalScript, ThermalShape, WorkloadProfile};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("parsing scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("malformed bundle: {0}")]
    Bundle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Transport(#[from] oda_transport::TransportError),
}
