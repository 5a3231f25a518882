use serde::{Deserialize, Serialize};

use crate::telemetry::Point;

/// A raw monotone counter reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterPoint {
    pub t: f64,
    pub value: u64,
    /// The counter was reset (or wrapped) since the previous reading.
    #[serde(default)]
    pub reset: bool,
}

impl CounterPoint {
    pub fn new(t: f64, value: u64) -> Self {
        CounterPoint { t, value, reset: false }
    }
}

/// Per-second rates between consecutive readings, stamped at the later reading.
///
/// Intervals ending in a flagged reset, a decreasing value, or a non-increasing
/// timestamp produce no point.
pub fn rate_from_counters(points: &[CounterPoint]) -> Vec<Point> {
    points
        .windows(2)
        .filter_map(|w| {
            let (prev, cur) = (w[0], w[1]);
            let dt = cur.t - prev.t;
            if cur.reset || cur.value < prev.value || !(dt > 0.0) {
                return None;
            }
            Some(Point::new(cur.t, (cur.value - prev.value) as f64 / dt))
        })
        .collect()
}
