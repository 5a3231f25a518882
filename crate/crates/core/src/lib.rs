//! Telemetry model and analyses for a small RISC-V HPC cluster.
//!
//! * [`telemetry`] – topic/payload wire codecs, rail taxonomy, trace types.
//! * [`analysis`] – windowing, boot segmentation, power decomposition,
//!   workload tables, efficiency and scaling, thermal events, counter rates.
//! * [`profiles`] – reference per-rail power levels and the boot schedule.
//! * [`report`] / [`plot`] – text, CSV and SVG emitters.

pub mod analysis;
pub mod plot;
pub mod profiles;
pub mod report;
pub mod telemetry;

pub use telemetry::{Frame, MetricSample, Plugin, PowerTrace, RailName, Subsystem, TopicPath};
