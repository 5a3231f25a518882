//! Moving telemetry frames from agents into a queryable store.
//!
//! [`Bus`] is an in-process publish/subscribe hub with MQTT topic-filter
//! semantics; [`MqttLink`] speaks to an external broker with the same wire
//! strings. Frames are appended to a [`SeriesStore`] by [`ingest_loop`] and
//! served back over HTTP by [`http::router`].

mod bus;
pub mod http;
mod ingest;
mod mqtt;
mod store;

use oda_core::telemetry::{Frame, MetricSample};
use thiserror::Error;

pub use bus::{topic_matches, validate_filter, Bus, Subscription};
pub use ingest::{ingest_frame, ingest_loop, IngestOutcome, IngestSnapshot, IngestStats};
pub use mqtt::{MqttConfig, MqttLink};
pub use store::{SeriesKey, SeriesStore, StoreConfig, StoreError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("transport down: {0}")]
    TransportDown(String),
    #[error("invalid topic filter {0:?}")]
    InvalidFilter(String),
}

/// Anything that can carry wire frames towards subscribers.
pub trait Transport: Send + Sync {
    fn publish_frame(&self, frame: Frame) -> Result<(), TransportError>;

    fn publish(&self, sample: &MetricSample) -> Result<(), TransportError> {
        self.publish_frame(sample.to_frame())
    }
}

impl<T: Transport + ?Sized> Transport for std::sync::Arc<T> {
    fn publish_frame(&self, frame: Frame) -> Result<(), TransportError> {
        (**self).publish_frame(frame)
    }
}
