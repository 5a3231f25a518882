//! Boot-phase segmentation of a core power trace.
//!
//! Three regions are located:
//!
//! * **R1** – supply on, clocks off: the run of core power above the power-on
//!   floor that ends where the PLL rail first becomes active.
//! * **R2** – clocks running, bootloader: from PLL activation to the operating
//!   system start.
//! * **R3** – operating system up, until the end of the trace.
//!
//! Without an explicit OS-ready marker the R2/R3 boundary is located in two
//! steps: first the earliest time after which the trailing mean stays within a
//! tolerance of the final plateau, then a least-squares single change point
//! inside the trailing window that precedes it.

use std::collections::BTreeMap;

use serde::Serialize;

use super::AnalysisError;
use crate::profiles::BootRegion;
use crate::telemetry::{slice_points, Point, PowerTrace, RailName};

#[derive(Debug, Clone, PartialEq)]
pub struct BootOptions {
    /// Core power-on floor as a fraction of the final plateau.
    pub power_on_fraction: f64,
    /// Absolute minimum of the power-on floor (mW).
    pub power_on_min_mw: f64,
    /// PLL activation threshold as a fraction of the PLL tail plateau.
    pub pll_fraction: f64,
    /// Absolute minimum of the PLL activation threshold (mW).
    pub pll_min_mw: f64,
    /// Length of the trailing mean used for settling detection (s).
    pub settle_window: f64,
    /// Length of the final plateau estimate (s).
    pub tail_window: f64,
    /// Relative tolerance of the settling test.
    pub settle_tolerance: f64,
}

impl Default for BootOptions {
    fn default() -> Self {
        BootOptions {
            power_on_fraction: 0.1,
            power_on_min_mw: 1.0,
            pll_fraction: 0.5,
            pll_min_mw: 0.5,
            settle_window: 5.0,
            tail_window: 10.0,
            settle_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootSegmentation {
    pub r1: (f64, f64),
    pub r2: (f64, f64),
    pub r3: (f64, f64),
    /// Mean power (mW) per region and rail.
    pub mean_power: BTreeMap<BootRegion, BTreeMap<RailName, f64>>,
}

impl BootSegmentation {
    pub fn bounds(&self, region: BootRegion) -> (f64, f64) {
        match region {
            BootRegion::R1 => self.r1,
            BootRegion::R2 => self.r2,
            BootRegion::R3 => self.r3,
        }
    }

    pub fn mean(&self, region: BootRegion, rail: RailName) -> Option<f64> {
        self.mean_power.get(&region).and_then(|m| m.get(&rail)).copied()
    }

    fn region_points<'a>(&self, region: BootRegion, points: &'a [Point]) -> &'a [Point] {
        let (start, end) = self.bounds(region);
        match region {
            // R3 runs to the end of the trace, last sample included.
            BootRegion::R3 => slice_points(points, start, f64::INFINITY),
            _ => slice_points(points, start, end),
        }
    }

    /// Adds region means for another rail over the core-derived bounds.
    ///
    /// Regions without samples in `trace` are left out.
    pub fn add_rail(&mut self, trace: &PowerTrace) {
        for region in BootRegion::ALL {
            let pts = self.region_points(region, trace.points());
            if let Some(m) = mean(pts) {
                self.mean_power.entry(region).or_default().insert(trace.rail(), m);
            }
        }
    }
}

fn mean(points: &[Point]) -> Option<f64> {
    if points.is_empty() {
        None
    } else {
        Some(points.iter().map(|p| p.v).sum::<f64>() / points.len() as f64)
    }
}

fn tail_mean(points: &[Point], span: f64) -> Option<f64> {
    let end = points.last()?.t;
    mean(slice_points(points, end - span, f64::INFINITY))
}

pub fn segment_boot(
    core: &PowerTrace,
    pll: &PowerTrace,
    os_ready_marker: Option<f64>,
) -> Result<BootSegmentation, AnalysisError> {
    segment_boot_with(core, pll, os_ready_marker, &BootOptions::default())
}

pub fn segment_boot_with(
    core: &PowerTrace,
    pll: &PowerTrace,
    os_ready_marker: Option<f64>,
    opts: &BootOptions,
) -> Result<BootSegmentation, AnalysisError> {
    if core.is_empty() || pll.is_empty() {
        return Err(AnalysisError::EmptyTrace);
    }
    let cp = core.points();

    let pll_plateau = tail_mean(pll.points(), opts.tail_window).unwrap_or(0.0);
    let pll_threshold = (opts.pll_fraction * pll_plateau).max(opts.pll_min_mw);
    let activation = pll
        .points()
        .iter()
        .find(|p| p.v >= pll_threshold)
        .map(|p| p.t)
        .ok_or(AnalysisError::NoPllActivation { threshold_mw: pll_threshold })?;

    let core_plateau = tail_mean(cp, opts.tail_window).unwrap_or(0.0);
    let floor = (opts.power_on_fraction * core_plateau).max(opts.power_on_min_mw);

    // R1: the run of powered samples immediately preceding activation.
    let act_idx = cp.partition_point(|p| p.t < activation);
    let r1_start_idx = cp[..act_idx]
        .iter()
        .rposition(|p| p.v <= floor)
        .map_or(0, |i| i + 1);
    if r1_start_idx >= act_idx {
        return Err(AnalysisError::TooShort(format!(
            "no powered core samples before pll activation at {activation}"
        )));
    }
    let r1 = (cp[r1_start_idx].t, activation);

    let end = cp.last().map(|p| p.t).unwrap_or(activation);
    let boundary = match os_ready_marker {
        Some(m) => {
            if !(m > activation && m < end) {
                return Err(AnalysisError::InvalidInput(format!(
                    "os-ready marker {m} outside ({activation}, {end})"
                )));
            }
            m
        }
        None => settle_boundary(&cp[act_idx..], core_plateau, opts)?,
    };
    let r2 = (activation, boundary);
    let r3 = (boundary, end);

    let mut seg = BootSegmentation { r1, r2, r3, mean_power: BTreeMap::new() };
    for region in BootRegion::ALL {
        if seg.region_points(region, cp).is_empty() {
            return Err(AnalysisError::TooShort(format!("region {region} holds no core samples")));
        }
    }
    seg.add_rail(core);
    seg.add_rail(pll);
    Ok(seg)
}

/// Locates the R2/R3 step among post-activation core samples.
fn settle_boundary(pts: &[Point], plateau: f64, opts: &BootOptions) -> Result<f64, AnalysisError> {
    let (Some(first), Some(last)) = (pts.first(), pts.last()) else {
        return Err(AnalysisError::TooShort("no core samples after pll activation".into()));
    };
    if last.t - first.t < opts.settle_window + opts.tail_window {
        return Err(AnalysisError::TooShort(format!(
            "{:.3} s after pll activation, need {} s",
            last.t - first.t,
            opts.settle_window + opts.tail_window
        )));
    }

    let mut prefix = Vec::with_capacity(pts.len() + 1);
    let mut prefix_sq = Vec::with_capacity(pts.len() + 1);
    prefix.push(0.0);
    prefix_sq.push(0.0);
    for p in pts {
        prefix.push(prefix.last().unwrap() + p.v);
        prefix_sq.push(prefix_sq.last().unwrap() + p.v * p.v);
    }

    // Trailing-window means, only where the window is fully covered.
    let tol = opts.settle_tolerance * plateau.abs();
    let mut lo = 0;
    let mut last_outside = None;
    for (i, p) in pts.iter().enumerate() {
        while pts[lo].t <= p.t - opts.settle_window {
            lo += 1;
        }
        if p.t - first.t < opts.settle_window {
            continue;
        }
        let m = (prefix[i + 1] - prefix[lo]) / (i + 1 - lo) as f64;
        if (m - plateau).abs() > tol {
            last_outside = Some(i);
        }
    }
    let settled = match last_outside {
        Some(i) if i + 1 < pts.len() => i + 1,
        Some(_) => {
            return Err(AnalysisError::TooShort("core power never settles".into()));
        }
        None => pts.partition_point(|p| p.t - first.t < opts.settle_window),
    };

    // Best two-level split of the samples that can contain the step.
    let search_from = pts.partition_point(|p| p.t < pts[settled].t - opts.settle_window - 1.0);
    let (a, b) = (search_from, settled + 1);
    if b - a < 2 {
        return Ok(pts[settled].t);
    }
    let sum = |i: usize, j: usize| prefix[j] - prefix[i];
    let sum_sq = |i: usize, j: usize| prefix_sq[j] - prefix_sq[i];
    let mut best = (f64::INFINITY, settled);
    for s in a + 1..b {
        let (n1, n2) = ((s - a) as f64, (b - s) as f64);
        let (s1, s2) = (sum(a, s), sum(s, b));
        let sse = sum_sq(a, b) - s1 * s1 / n1 - s2 * s2 / n2;
        if sse < best.0 {
            best = (sse, s);
        }
    }
    Ok(pts[best.1].t)
}
