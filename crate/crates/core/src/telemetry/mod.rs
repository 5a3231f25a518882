//! Wire model shared by agents, the ingestion service and the analyses.

mod payload;
mod rail;
mod sensor;
mod topic;
mod trace;

use thiserror::Error;

pub use payload::{check_payload, decode_payload, encode_payload, quantize, PAYLOAD_DECIMALS};
pub use rail::{subsystem_of, RailName, Subsystem};
pub use sensor::SensorMap;
pub use topic::{decode_topic, encode_topic, Plugin, TopicPath};
pub use trace::{slice_points, Point, PowerTrace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TelemetryError {
    #[error("malformed topic {0}")]
    MalformedTopic(String),
    #[error("malformed payload {0}")]
    MalformedPayload(String),
    #[error("invalid topic: {0}")]
    InvalidTopic(String),
    #[error("unknown plugin {0:?}")]
    UnknownPlugin(String),
    #[error("unknown rail {0:?}")]
    UnknownRail(String),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("invalid sensor map: {0}")]
    InvalidSensorMap(String),
}

/// A raw `(topic, payload)` pair as carried by the transport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub topic: String,
    pub payload: String,
}

/// One timestamped reading.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub topic: TopicPath,
    pub value: f64,
    /// Seconds since the Unix epoch.
    pub timestamp: f64,
}

impl MetricSample {
    pub fn new(topic: TopicPath, value: f64, timestamp: f64) -> Result<Self, TelemetryError> {
        check_payload(value, timestamp)?;
        Ok(MetricSample { topic, value, timestamp })
    }

    pub fn to_frame(&self) -> Frame {
        Frame {
            topic: encode_topic(&self.topic),
            payload: encode_payload(self.value, self.timestamp),
        }
    }

    pub fn from_frame(frame: &Frame) -> Result<Self, TelemetryError> {
        let topic = decode_topic(&frame.topic)?;
        let (value, timestamp) = decode_payload(&frame.payload)?;
        Ok(MetricSample { topic, value, timestamp })
    }
}
