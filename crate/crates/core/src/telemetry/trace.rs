use serde::{Deserialize, Serialize};

use super::{RailName, TelemetryError};

/// A single `(timestamp seconds, value)` observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub t: f64,
    pub v: f64,
}

impl Point {
    pub fn new(t: f64, v: f64) -> Self {
        Point { t, v }
    }
}

impl From<(f64, f64)> for Point {
    fn from((t, v): (f64, f64)) -> Self {
        Point { t, v }
    }
}

/// Instantaneous power of one rail, in milliwatts, strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    rail: RailName,
    points: Vec<Point>,
}

impl PowerTrace {
    pub fn new(rail: RailName, points: Vec<Point>) -> Result<Self, TelemetryError> {
        for (i, p) in points.iter().enumerate() {
            if !p.t.is_finite() || !p.v.is_finite() || p.v < 0.0 {
                return Err(TelemetryError::InvalidTrace(format!(
                    "{rail}: sample {i} ({}, {}) is not a finite non-negative power",
                    p.t, p.v
                )));
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(TelemetryError::InvalidTrace(format!(
                "{rail}: timestamps not strictly increasing at sample {}",
                i + 1
            )));
        }
        Ok(PowerTrace { rail, points })
    }

    pub fn from_pairs(rail: RailName, pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, TelemetryError> {
        PowerTrace::new(rail, pairs.into_iter().map(Point::from).collect())
    }

    pub fn rail(&self) -> RailName {
        self.rail
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean(&self) -> Option<f64> {
        mean_of(&self.points)
    }

    /// Samples with `start <= t < end`.
    pub fn slice(&self, start: f64, end: f64) -> &[Point] {
        slice_points(&self.points, start, end)
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

pub(crate) fn mean_of(points: &[Point]) -> Option<f64> {
    if points.is_empty() {
        None
    } else {
        Some(points.iter().map(|p| p.v).sum::<f64>() / points.len() as f64)
    }
}

/// Half-open `[start, end)` slice of a time-sorted point list.
pub fn slice_points(points: &[Point], start: f64, end: f64) -> &[Point] {
    let lo = points.partition_point(|p| p.t < start);
    let hi = points.partition_point(|p| p.t < end);
    &points[lo..hi.max(lo)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unordered_or_negative() {
        assert!(PowerTrace::from_pairs(RailName::Core, [(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(PowerTrace::from_pairs(RailName::Core, [(1.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(PowerTrace::from_pairs(RailName::Core, [(1.0, -1.0)]).is_err());
        assert!(PowerTrace::from_pairs(RailName::Core, [(1.0, f64::NAN)]).is_err());
        assert!(PowerTrace::from_pairs(RailName::Core, [(1.0, 0.0), (2.0, 5.0)]).is_ok());
    }

    #[test]
    fn slices_half_open() {
        let tr = PowerTrace::from_pairs(RailName::Pll, (0..10).map(|i| (i as f64, i as f64))).unwrap();
        let s = tr.slice(2.0, 5.0);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].t, 2.0);
        assert!(tr.slice(5.0, 2.0).is_empty());
    }
}
