//! Threshold and runaway detection on temperature series.
//!
//! Each kind fires at most once per `(node, sensor)` series, so raising any
//! threshold can only remove events.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::telemetry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EventKind {
    Warn,
    Critical,
    Runaway,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Warn => "WARN",
            EventKind::Critical => "CRITICAL",
            EventKind::Runaway => "RUNAWAY",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalThresholds {
    /// °C
    pub warn: f64,
    /// °C
    pub critical: f64,
    /// °C/s
    pub runaway_rate: f64,
    /// Slope-fit window, seconds.
    pub runaway_window: f64,
}

impl ThermalThresholds {
    pub fn new(warn: f64, critical: f64) -> Self {
        ThermalThresholds { warn, critical, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.warn < self.critical) {
            return Err(AnalysisError::InvalidInput(format!(
                "warn ({}) must be below critical ({})",
                self.warn, self.critical
            )));
        }
        if !(self.runaway_window > 0.0) || self.runaway_rate.is_nan() {
            return Err(AnalysisError::InvalidInput("runaway window must be positive".into()));
        }
        Ok(())
    }
}

impl Default for ThermalThresholds {
    fn default() -> Self {
        ThermalThresholds { warn: 60.0, critical: 95.0, runaway_rate: 1.0, runaway_window: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureTrace {
    pub node: String,
    pub sensor: String,
    /// Time-sorted °C readings.
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalEvent {
    pub node: String,
    pub sensor: String,
    pub kind: EventKind,
    pub onset: f64,
    /// Highest reading from onset until the series drops back below the threshold.
    pub peak: f64,
}

fn excursion_peak(points: &[Point], from: usize, threshold: f64) -> f64 {
    points[from..]
        .iter()
        .take_while(|p| p.v >= threshold)
        .map(|p| p.v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Least-squares slope of `v` against `t`.
fn slope(points: &[Point]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let t_mean = points.iter().map(|p| p.t).sum::<f64>() / n;
    let v_mean = points.iter().map(|p| p.v).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in points {
        let dt = p.t - t_mean;
        sxy += dt * (p.v - v_mean);
        sxx += dt * dt;
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

fn detect_one(trace: &TemperatureTrace, th: &ThermalThresholds) -> Vec<ThermalEvent> {
    let pts = &trace.points;
    let mut events = Vec::new();
    let event = |kind, idx: usize, threshold: f64| ThermalEvent {
        node: trace.node.clone(),
        sensor: trace.sensor.clone(),
        kind,
        onset: pts[idx].t,
        peak: excursion_peak(pts, idx, threshold),
    };

    if let Some(i) = pts.iter().position(|p| p.v >= th.warn) {
        events.push(event(EventKind::Warn, i, th.warn));
    }
    if let Some(i) = pts.iter().position(|p| p.v >= th.critical) {
        events.push(event(EventKind::Critical, i, th.critical));
    }

    // Closed window [t - w, t], fully covered by data and entirely above warn.
    let Some(first) = pts.first() else {
        return events;
    };
    let mut lo = 0;
    for (i, p) in pts.iter().enumerate() {
        while pts[lo].t < p.t - th.runaway_window {
            lo += 1;
        }
        if p.t - first.t < th.runaway_window {
            continue;
        }
        let win = &pts[lo..=i];
        if win.iter().all(|q| q.v >= th.warn) && slope(win).is_some_and(|s| s > th.runaway_rate) {
            events.push(event(EventKind::Runaway, i, th.warn));
            break;
        }
    }
    events.sort_by(|a, b| a.onset.total_cmp(&b.onset).then(a.kind.cmp(&b.kind)));
    events
}

pub fn detect_thermal_events(
    traces: &[TemperatureTrace],
    thresholds: &ThermalThresholds,
) -> Result<Vec<ThermalEvent>, AnalysisError> {
    thresholds.validate()?;
    Ok(traces.iter().flat_map(|t| detect_one(t, thresholds)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, secs: f64, dt: f64) -> TemperatureTrace {
        let n = (secs / dt).round() as usize;
        TemperatureTrace {
            node: "mc07".into(),
            sensor: "cpu_temp".into(),
            points: (0..=n).map(|i| Point::new(i as f64 * dt, f(i as f64 * dt))).collect(),
        }
    }

    fn kinds(ev: &[ThermalEvent]) -> Vec<EventKind> {
        ev.iter().map(|e| e.kind).collect()
    }

    #[test]
    fn ramp_to_107_fires_critical() {
        let tr = series(|t| 71.0 + 36.0 * t / 30.0, 30.0, 1.0);
        let ev = detect_thermal_events(&[tr], &ThermalThresholds::new(60.0, 95.0)).unwrap();
        let crit: Vec<_> = ev.iter().filter(|e| e.kind == EventKind::Critical).collect();
        assert_eq!(crit.len(), 1);
        assert_eq!(crit[0].peak, 107.0);
        assert_eq!(ev.iter().filter(|e| e.kind == EventKind::Runaway).count(), 1);
    }

    #[test]
    fn steady_39_is_quiet() {
        let tr = series(|_| 39.0, 600.0, 5.0);
        let ev = detect_thermal_events(&[tr], &ThermalThresholds::new(60.0, 95.0)).unwrap();
        assert!(ev.is_empty());
    }

    #[test]
    fn step_to_71_warns_only() {
        let tr = series(|t| if t < 60.0 { 30.0 } else { 71.0 }, 600.0, 5.0);
        let ev = detect_thermal_events(&[tr], &ThermalThresholds::new(60.0, 95.0)).unwrap();
        assert_eq!(kinds(&ev), vec![EventKind::Warn]);
        assert_eq!(ev[0].onset, 60.0);
        assert_eq!(ev[0].peak, 71.0);
    }

    #[test]
    fn slow_ramp_is_not_runaway() {
        let tr = series(|t| 71.0 + 36.0 * t / 300.0, 300.0, 5.0);
        let ev = detect_thermal_events(&[tr], &ThermalThresholds::default()).unwrap();
        assert_eq!(kinds(&ev), vec![EventKind::Warn, EventKind::Critical]);
    }

    #[test]
    fn peak_ends_with_excursion() {
        let tr = series(|t| if (10.0..20.0).contains(&t) { 80.0 } else if t >= 40.0 { 90.0 } else { 40.0 }, 60.0, 1.0);
        let ev = detect_thermal_events(&[tr], &ThermalThresholds::default()).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].onset, ev[0].peak), (10.0, 80.0));
    }

    #[test]
    fn bad_thresholds() {
        assert!(detect_thermal_events(&[], &ThermalThresholds::new(95.0, 60.0)).is_err());
    }
}
