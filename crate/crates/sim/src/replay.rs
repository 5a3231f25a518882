use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, RecvTimeoutError};
use oda_core::telemetry::{MetricSample, TopicPath};
use oda_transport::Transport;
use serde::Serialize;

use crate::bundle::{Bundle, NodeTrace};
use crate::SimError;

const OUTBOUND_QUEUE: usize = 65_536;
/// How long the publisher retries a refused sample before giving up.
const GIVE_UP: Duration = Duration::from_secs(2);
const RETRY: Duration = Duration::from_millis(50);

/// Wall-clock pacing of a replay. Stored timestamps are never altered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    /// Trace seconds per wall second.
    Factor(f64),
    /// As fast as the transport accepts.
    Unlimited,
}

impl fmt::Display for Speed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speed::Factor(x) => write!(f, "{x}"),
            Speed::Unlimited => f.write_str("inf"),
        }
    }
}

impl FromStr for Speed {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "unlimited" | "max" => Ok(Speed::Unlimited),
            other => match other.trim_end_matches('x').parse::<f64>() {
                Ok(x) if x.is_infinite() && x > 0.0 => Ok(Speed::Unlimited),
                Ok(x) if x > 0.0 && x.is_finite() => Ok(Speed::Factor(x)),
                _ => Err(SimError::InvalidScenario(format!("speed must be positive or \"inf\", got {s:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ReplayReport {
    pub nodes: usize,
    pub published: u64,
    /// Wall-clock seconds spent.
    pub elapsed: f64,
}

/// Publishes every sample of `bundle` with its original timestamp.
///
/// One pacing thread per node feeds a single bounded queue drained by one
/// publisher; within a node, samples go out in timestamp order.
pub fn replay(bundle: &Bundle, transport: &dyn Transport, speed: Speed) -> Result<ReplayReport, SimError> {
    bundle.validate()?;
    let t0 = bundle
        .nodes
        .iter()
        .flat_map(|n| n.signals.iter().filter_map(|(_, p)| p.first().map(|p| p.t)))
        .fold(f64::INFINITY, f64::min);
    let began = Instant::now();
    let abort = AtomicBool::new(false);
    let published = AtomicU64::new(0);
    let (tx, rx) = bounded::<MetricSample>(OUTBOUND_QUEUE);
    let topics = bundle
        .nodes
        .iter()
        .map(|n| n.signals.iter().map(|(sig, _)| bundle.topic(&n.hostname, sig)).collect::<Result<Vec<TopicPath>, _>>())
        .collect::<Result<Vec<_>, _>>()?;

    let outcome = thread::scope(|s| {
        for (node, topics) in bundle.nodes.iter().zip(&topics) {
            let tx = tx.clone();
            let abort = &abort;
            s.spawn(move || {
                for (i, p) in merged(node) {
                    if abort.load(Ordering::Relaxed) {
                        return;
                    }
                    if let Speed::Factor(f) = speed {
                        let due = began + Duration::from_secs_f64(((p.0 - t0) / f).max(0.0));
                        let now = Instant::now();
                        if due > now + Duration::from_millis(1) {
                            thread::sleep(due - now);
                        }
                    }
                    let sample = MetricSample { topic: topics[i].clone(), value: p.1, timestamp: p.0 };
                    if tx.send(sample).is_err() {
                        return;
                    }
                }
            });
        }
        drop(tx);

        let mut pending: Option<MetricSample> = None;
        let mut refused_since: Option<Instant> = None;
        loop {
            let sample = match pending.take() {
                Some(s) => s,
                None => match rx.recv_timeout(RETRY) {
                    Ok(s) => s,
                    Err(RecvTimeoutError::Timeout) => continue,
                    Err(RecvTimeoutError::Disconnected) => return Ok(()),
                },
            };
            match transport.publish(&sample) {
                Ok(()) => {
                    published.fetch_add(1, Ordering::Relaxed);
                    refused_since = None;
                }
                Err(e) => {
                    let since = *refused_since.get_or_insert_with(Instant::now);
                    if since.elapsed() >= GIVE_UP {
                        abort.store(true, Ordering::Relaxed);
                        // Unblock pacers waiting on a full queue.
                        while rx.try_recv().is_ok() {}
                        drop(rx);
                        return Err(SimError::Transport(e));
                    }
                    pending = Some(sample);
                    thread::sleep(RETRY);
                }
            }
        }
    });
    outcome?;
    Ok(ReplayReport {
        nodes: bundle.nodes.len(),
        published: published.into_inner(),
        elapsed: began.elapsed().as_secs_f64(),
    })
}

/// All samples of a node as `(signal index, (t, v))` in timestamp order,
/// ties broken by signal order.
fn merged(node: &NodeTrace) -> impl Iterator<Item = (usize, (f64, f64))> + '_ {
    let mut cursors = vec![0usize; node.signals.len()];
    std::iter::from_fn(move || {
        let mut best: Option<(usize, f64)> = None;
        for (i, (_, pts)) in node.signals.iter().enumerate() {
            if let Some(p) = pts.get(cursors[i]) {
                if best.is_none_or(|(_, t)| p.t < t) {
                    best = Some((i, p.t));
                }
            }
        }
        let (i, _) = best?;
        let p = node.signals[i].1[cursors[i]];
        cursors[i] += 1;
        Some((i, (p.t, p.v)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_speed() {
        assert_eq!("inf".parse::<Speed>().unwrap(), Speed::Unlimited);
        assert_eq!("10x".parse::<Speed>().unwrap(), Speed::Factor(10.0));
        assert_eq!("0.5".parse::<Speed>().unwrap(), Speed::Factor(0.5));
        assert!("0".parse::<Speed>().is_err());
        assert!("-2".parse::<Speed>().is_err());
        assert!("fast".parse::<Speed>().is_err());
    }
}
