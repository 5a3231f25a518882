use super::AnalysisError;
use crate::telemetry::{Point, PowerTrace};

// Wire timestamps carry microseconds; samples within half of that from a
// window edge belong to the window that starts there.
const EDGE_SLACK: f64 = 0.5e-6;

/// Non-overlapping window means over a time-sorted series.
///
/// Windows are `[t0 + k·w, t0 + (k+1)·w)` with `t0` the first timestamp; each
/// non-empty window yields one point at its midpoint.
pub fn window_points(points: &[Point], window: f64) -> Result<Vec<Point>, AnalysisError> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!("window must be positive, got {window}")));
    }
    let Some(first) = points.first() else {
        return Err(AnalysisError::EmptyTrace);
    };
    let t0 = first.t;
    let mut out = Vec::new();
    let mut current: Option<(i64, f64, usize)> = None;
    for p in points {
        let k = ((p.t - t0 + EDGE_SLACK) / window).floor() as i64;
        match &mut current {
            Some((ck, sum, n)) if *ck == k => {
                *sum += p.v;
                *n += 1;
            }
            _ => {
                if let Some((ck, sum, n)) = current.take() {
                    out.push(Point::new(t0 + (ck as f64 + 0.5) * window, sum / n as f64));
                }
                current = Some((k, p.v, 1));
            }
        }
    }
    if let Some((ck, sum, n)) = current {
        out.push(Point::new(t0 + (ck as f64 + 0.5) * window, sum / n as f64));
    }
    Ok(out)
}

/// Averages a power trace over fixed windows of `window` seconds.
pub fn window_average(trace: &PowerTrace, window: f64) -> Result<PowerTrace, AnalysisError> {
    let points = window_points(trace.points(), window)?;
    Ok(PowerTrace::new(trace.rail(), points)?)
}
