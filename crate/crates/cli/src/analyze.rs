//! Glue between datasets and the analysis library. Each function is what one
//! subcommand computes, before rendering.

use std::collections::BTreeMap;

use oda_core::analysis::{
    decompose_power, detect_thermal_events, leakage_share, segment_boot, workload_table, BootSegmentation,
    LeakageShare, PowerDecomposition, TemperatureTrace, ThermalEvent, ThermalThresholds, WorkloadPowerTable,
};
use oda_core::profiles::{BootRegion, RailMeans, Workload};
use oda_core::report::BootColumns;
use oda_core::telemetry::{PowerTrace, RailName};
use oda_sim::ProfileName;

use crate::data::{Dataset, Span};
use crate::error::CliError;

/// Offsets given on the command line are relative to this epoch time: the
/// scenario start for bundles, the node's first power sample for stores.
pub fn origin(ds: &Dataset, node: &str) -> Result<f64, CliError> {
    if let Some(t) = ds.epoch() {
        return Ok(t);
    }
    Ok(ds.series(node, &RailName::Core.metric_name(), None)?[0].t)
}

/// Absolute spans of the generated phases of `node`, in timeline order.
pub fn phase_spans(ds: &Dataset, node: &str) -> Vec<(ProfileName, Span)> {
    let (Some(phases), Some(epoch)) = (ds.phases(node), ds.epoch()) else {
        return Vec::new();
    };
    phases.iter().map(|p| (p.workload, Span { start: epoch + p.start, end: epoch + p.end })).collect()
}

pub fn power_traces(ds: &Dataset, node: &str, span: Span) -> Result<BTreeMap<RailName, PowerTrace>, CliError> {
    let mut out = BTreeMap::new();
    for rail in RailName::ALL {
        let pts = ds.series(node, &rail.metric_name(), None)?;
        let slice = span.slice(&pts);
        if slice.is_empty() {
            return Err(CliError::missing(format!("{node}: no {rail} samples in the window")));
        }
        out.insert(rail, PowerTrace::new(rail, slice.to_vec()).map_err(|e| CliError::Precondition(e.to_string()))?);
    }
    Ok(out)
}

pub fn power_table(ds: &Dataset, node: &str, label: &str, span: Span) -> Result<WorkloadPowerTable, CliError> {
    Ok(workload_table(&power_traces(ds, node, span)?, label)?)
}

/// Span of the first phase running `name`.
pub fn find_phase(ds: &Dataset, node: &str, name: ProfileName) -> Result<Span, CliError> {
    phase_spans(ds, node)
        .into_iter()
        .find(|(p, _)| *p == name)
        .map(|(_, s)| s)
        .ok_or_else(|| CliError::missing(format!("{node} has no {name} phase")))
}

/// Column spans for the multi-workload table: explicit ones, or one per steady
/// workload found in the bundle timeline (canonical workload order).
pub fn table_columns(ds: &Dataset, node: &str, explicit: Vec<(String, Span)>) -> Result<Vec<(String, Span)>, CliError> {
    if !explicit.is_empty() {
        return Ok(explicit);
    }
    let spans = phase_spans(ds, node);
    let cols: Vec<_> = Workload::ALL
        .into_iter()
        .filter_map(|w| spans.iter().find(|(p, _)| *p == ProfileName::Steady(w)).map(|(_, s)| (w.to_string(), *s)))
        .collect();
    if cols.is_empty() {
        return Err(CliError::missing(format!("{node}: no workload phases; pass --phase NAME=FROM:TO")));
    }
    Ok(cols)
}

/// Segments a boot over `span` using the core and pll rails, then adds
/// region means for every other rail.
pub fn boot_segmentation(ds: &Dataset, node: &str, span: Span) -> Result<BootSegmentation, CliError> {
    let traces = power_traces(ds, node, span)?;
    let mut seg = segment_boot(&traces[&RailName::Core], &traces[&RailName::Pll], None)?;
    for (rail, t) in &traces {
        if !matches!(rail, RailName::Core | RailName::Pll) {
            seg.add_rail(t);
        }
    }
    Ok(seg)
}

pub fn boot_columns(seg: &BootSegmentation) -> BootColumns {
    let region = |r: BootRegion| {
        let mut m = RailMeans::zero();
        for rail in RailName::ALL {
            m.set(rail, seg.mean(r, rail).unwrap_or(0.0));
        }
        m
    };
    BootColumns { r1: region(BootRegion::R1), r2: region(BootRegion::R2) }
}

pub fn table5(
    ds: &Dataset,
    node: &str,
    columns: &[(String, Span)],
    boot: Option<Span>,
) -> Result<(Vec<WorkloadPowerTable>, Option<BootColumns>), CliError> {
    let tables = columns
        .iter()
        .map(|(label, span)| power_table(ds, node, label, *span))
        .collect::<Result<Vec<_>, _>>()?;
    let boot = boot.map(|s| boot_segmentation(ds, node, s)).transpose()?;
    Ok((tables, boot.as_ref().map(boot_columns)))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BootReport {
    pub segmentation: BootSegmentation,
    pub decompositions: Vec<PowerDecomposition>,
    pub leakage: Vec<LeakageShare>,
}

/// Idle reference per rail: explicit, else an Idle phase mean, else the R3 mean.
pub fn idle_level(
    ds: &Dataset,
    node: &str,
    seg: &BootSegmentation,
    rail: RailName,
    explicit: Option<f64>,
) -> Result<f64, CliError> {
    if let Some(v) = explicit {
        return Ok(v);
    }
    if let Ok(span) = find_phase(ds, node, ProfileName::Steady(Workload::Idle)) {
        return Ok(power_table(ds, node, "Idle", span)?.mean(rail));
    }
    seg.mean(BootRegion::R3, rail).ok_or_else(|| CliError::missing(format!("no R3 samples for {rail}")))
}

pub fn boot_decompose(
    ds: &Dataset,
    node: &str,
    span: Span,
    rails: &[RailName],
    leakage_rails: &[RailName],
    idle: Option<f64>,
) -> Result<BootReport, CliError> {
    let seg = boot_segmentation(ds, node, span)?;
    let mut decompositions = Vec::new();
    for &rail in rails {
        let idle = idle_level(ds, node, &seg, rail, idle)?;
        decompositions.push(decompose_power(&seg, idle, rail)?);
    }
    let mut leakage = Vec::new();
    for &rail in leakage_rails {
        let r1 = seg.mean(BootRegion::R1, rail).ok_or_else(|| CliError::missing(format!("no R1 samples for {rail}")))?;
        let idle = idle_level(ds, node, &seg, rail, idle)?;
        leakage.push(leakage_share(r1, idle, rail)?);
    }
    Ok(BootReport { segmentation: seg, decompositions, leakage })
}

/// Every `temperature.*` series of the given nodes.
pub fn temperature_traces(ds: &Dataset, nodes: &[String]) -> Result<Vec<TemperatureTrace>, CliError> {
    let mut out = Vec::new();
    for node in nodes {
        for (core, metric) in ds.metrics(node) {
            if let (None, Some(sensor)) = (core, metric.strip_prefix("temperature.")) {
                out.push(TemperatureTrace {
                    node: node.clone(),
                    sensor: sensor.to_string(),
                    points: ds.series(node, &metric, None)?,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::missing("no temperature series found"));
    }
    out.sort_by(|a, b| (&a.node, &a.sensor).cmp(&(&b.node, &b.sensor)));
    Ok(out)
}

pub fn thermal(ds: &Dataset, nodes: &[String], thresholds: &ThermalThresholds) -> Result<Vec<ThermalEvent>, CliError> {
    Ok(detect_thermal_events(&temperature_traces(ds, nodes)?, thresholds)?)
}
