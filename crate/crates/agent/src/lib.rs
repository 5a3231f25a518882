//! Node agent: samplers on fixed periods feeding one outbound publisher.
//!
//! Each [`SamplerSpec`] runs on its own thread with its own [`Source`]. All
//! samples pass through a single queue to the publisher thread, which holds
//! up to `buffer_limit` samples per plugin while the transport is down and
//! drops the oldest beyond that.

pub mod catalog;
mod clock;
mod config;
mod runner;
pub mod source;

pub use clock::{Clock, SimulatedClock, SystemClock};
pub use config::{AgentConfig, ConfigError, RailChannel, SamplerSpec, SourceBackend, SyntheticSource};
pub use runner::{run_agent, Agent, AgentHandle, AgentReport};
pub use source::{read_rail_power, read_thermal, Source, SourceError};
