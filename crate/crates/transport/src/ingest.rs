use std::sync::atomic::{AtomicU64, Ordering};

use crossbeam_channel::Receiver;
use oda_core::telemetry::{Frame, MetricSample};
use serde::Serialize;

use crate::store::{SeriesKey, SeriesStore, StoreError};

/// Ingestion counters, shared between the ingest loop and readers.
#[derive(Debug, Default)]
pub struct IngestStats {
    accepted: AtomicU64,
    rejects: AtomicU64,
    duplicates: AtomicU64,
    out_of_order: AtomicU64,
    store_errors: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestSnapshot {
    pub accepted: u64,
    /// Frames whose topic or payload failed to decode.
    pub rejects: u64,
    pub duplicates: u64,
    pub out_of_order: u64,
    pub store_errors: u64,
}

impl IngestStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn snapshot(&self) -> IngestSnapshot {
        IngestSnapshot {
            accepted: self.accepted.load(Ordering::Relaxed),
            rejects: self.rejects.load(Ordering::Relaxed),
            duplicates: self.duplicates.load(Ordering::Relaxed),
            out_of_order: self.out_of_order.load(Ordering::Relaxed),
            store_errors: self.store_errors.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestOutcome {
    Stored,
    Rejected,
    Duplicate,
    OutOfOrder,
    StoreError,
}

/// Decodes and stores one frame, bumping the matching counter.
pub fn ingest_frame(store: &SeriesStore, stats: &IngestStats, frame: &Frame) -> IngestOutcome {
    let sample = match MetricSample::from_frame(frame) {
        Ok(s) => s,
        Err(e) => {
            log::debug!("rejecting frame on {:?}: {e}", frame.topic);
            stats.rejects.fetch_add(1, Ordering::Relaxed);
            return IngestOutcome::Rejected;
        }
    };
    let key = SeriesKey::from(&sample.topic);
    match store.append(&key, sample.timestamp, sample.value) {
        Ok(()) => {
            stats.accepted.fetch_add(1, Ordering::Relaxed);
            IngestOutcome::Stored
        }
        Err(StoreError::Duplicate { .. }) => {
            stats.duplicates.fetch_add(1, Ordering::Relaxed);
            IngestOutcome::Duplicate
        }
        Err(StoreError::OutOfOrder { .. }) => {
            stats.out_of_order.fetch_add(1, Ordering::Relaxed);
            IngestOutcome::OutOfOrder
        }
        Err(e) => {
            log::error!("storing {key}: {e}");
            stats.store_errors.fetch_add(1, Ordering::Relaxed);
            IngestOutcome::StoreError
        }
    }
}

/// Drains `frames` into the store until every sender is gone.
pub fn ingest_loop(frames: &Receiver<Frame>, store: &SeriesStore, stats: &IngestStats) {
    for frame in frames.iter() {
        ingest_frame(store, stats, &frame);
    }
    if let Err(e) = store.flush() {
        log::error!("flushing store after ingest: {e}");
    }
}
