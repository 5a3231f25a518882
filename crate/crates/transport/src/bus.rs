use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use crossbeam_channel::{bounded, Receiver, RecvTimeoutError, Sender, TryRecvError};
use oda_core::telemetry::Frame;
use parking_lot::RwLock;

use crate::{Transport, TransportError};

/// Per-subscriber queue depth. A full queue blocks the publisher.
pub const DEFAULT_QUEUE: usize = 65_536;

/// Checks an MQTT topic filter: `+` must fill a whole level, `#` must be the
/// whole last level.
pub fn validate_filter(filter: &str) -> Result<(), TransportError> {
    let bad = || TransportError::InvalidFilter(filter.to_string());
    if filter.is_empty() {
        return Err(bad());
    }
    let levels: Vec<&str> = filter.split('/').collect();
    for (i, level) in levels.iter().enumerate() {
        if level.contains('#') && (*level != "#" || i + 1 != levels.len()) {
            return Err(bad());
        }
        if level.contains('+') && *level != "+" {
            return Err(bad());
        }
    }
    Ok(())
}

/// MQTT filter matching of a concrete topic name.
pub fn topic_matches(filter: &str, topic: &str) -> bool {
    let mut f = filter.split('/');
    let mut t = topic.split('/');
    loop {
        match (f.next(), t.next()) {
            (Some("#"), _) => return true,
            (Some("+"), Some(_)) => {}
            (Some(a), Some(b)) if a == b => {}
            (None, None) => return true,
            _ => return false,
        }
    }
}

struct Subscriber {
    filter: String,
    tx: Sender<Frame>,
}

struct Inner {
    subscribers: RwLock<Vec<Subscriber>>,
    down: AtomicBool,
    queue: usize,
}

/// In-process publish/subscribe hub. Cloning shares the hub.
#[derive(Clone)]
pub struct Bus {
    inner: Arc<Inner>,
}

impl Default for Bus {
    fn default() -> Self {
        Bus::with_queue(DEFAULT_QUEUE)
    }
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_queue(queue: usize) -> Self {
        Bus {
            inner: Arc::new(Inner {
                subscribers: RwLock::new(Vec::new()),
                down: AtomicBool::new(false),
                queue: queue.max(1),
            }),
        }
    }

    pub fn subscribe(&self, filter: &str) -> Result<Subscription, TransportError> {
        validate_filter(filter)?;
        let (tx, rx) = bounded(self.inner.queue);
        self.inner.subscribers.write().push(Subscriber { filter: filter.to_string(), tx });
        Ok(Subscription { rx })
    }

    /// Delivers a frame without any validation; used to inject corrupt input.
    pub fn publish_raw(&self, frame: Frame) -> Result<(), TransportError> {
        if self.is_down() {
            return Err(TransportError::TransportDown("bus marked down".into()));
        }
        let targets: Vec<Sender<Frame>> = self
            .inner
            .subscribers
            .read()
            .iter()
            .filter(|s| topic_matches(&s.filter, &frame.topic))
            .map(|s| s.tx.clone())
            .collect();
        let mut gone: Vec<Sender<Frame>> = Vec::new();
        if let Some((last, rest)) = targets.split_last() {
            for tx in rest {
                if tx.send(frame.clone()).is_err() {
                    gone.push(tx.clone());
                }
            }
            if last.send(frame).is_err() {
                gone.push(last.clone());
            }
        }
        if !gone.is_empty() {
            self.inner.subscribers.write().retain(|s| !gone.iter().any(|g| g.same_channel(&s.tx)));
        }
        Ok(())
    }

    /// Failure injection: while down, every publish returns `TransportDown`.
    pub fn set_down(&self, down: bool) {
        self.inner.down.store(down, Ordering::SeqCst);
    }

    pub fn is_down(&self) -> bool {
        self.inner.down.load(Ordering::SeqCst)
    }

    pub fn subscriber_count(&self) -> usize {
        self.inner.subscribers.read().len()
    }

    /// Drops every subscriber's sending side so their receive loops finish
    /// once the queued frames are drained.
    pub fn close(&self) {
        self.inner.subscribers.write().clear();
    }
}

impl Transport for Bus {
    fn publish_frame(&self, frame: Frame) -> Result<(), TransportError> {
        self.publish_raw(frame)
    }
}

/// Receiving end of a bus subscription.
pub struct Subscription {
    rx: Receiver<Frame>,
}

impl Subscription {
    pub fn from_receiver(rx: Receiver<Frame>) -> Self {
        Subscription { rx }
    }

    pub fn recv(&self) -> Option<Frame> {
        self.rx.recv().ok()
    }

    pub fn recv_timeout(&self, timeout: Duration) -> Result<Frame, RecvTimeoutError> {
        self.rx.recv_timeout(timeout)
    }

    pub fn try_recv(&self) -> Result<Frame, TryRecvError> {
        self.rx.try_recv()
    }

    pub fn receiver(&self) -> &Receiver<Frame> {
        &self.rx
    }

    pub fn into_receiver(self) -> Receiver<Frame> {
        self.rx
    }
}

impl Iterator for Subscription {
    type Item = Frame;

    fn next(&mut self) -> Option<Frame> {
        self.rx.recv().ok()
    }
}
