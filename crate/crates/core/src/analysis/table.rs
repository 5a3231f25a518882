use std::collections::BTreeMap;

use serde::Serialize;

use super::AnalysisError;
use crate::profiles::RailMeans;
use crate::telemetry::{PowerTrace, RailName, Subsystem};

/// Per-rail mean power and shares for one workload.
///
/// Percentages are kept unrounded; the `display_*` helpers round for tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadPowerTable {
    pub workload: String,
    pub rail_mean: RailMeans,
    pub total: f64,
    pub rail_percent: [f64; 9],
    pub subsystem_percent: BTreeMap<Subsystem, f64>,
}

impl WorkloadPowerTable {
    pub fn mean(&self, rail: RailName) -> f64 {
        self.rail_mean.get(rail)
    }

    pub fn percent(&self, rail: RailName) -> f64 {
        self.rail_percent[rail.index()]
    }

    pub fn subsystem(&self, s: Subsystem) -> f64 {
        self.subsystem_percent.get(&s).copied().unwrap_or(0.0)
    }

    pub fn display_mean(&self, rail: RailName) -> i64 {
        self.mean(rail).round() as i64
    }

    pub fn display_percent(&self, rail: RailName) -> i64 {
        self.percent(rail).round() as i64
    }

    pub fn display_total(&self) -> i64 {
        self.total.round() as i64
    }
}

pub fn workload_table_from_means(workload: &str, means: RailMeans) -> WorkloadPowerTable {
    let total = means.total();
    let pct = |mw: f64| if total == 0.0 { 0.0 } else { mw / total * 100.0 };
    let rail_percent = std::array::from_fn(|i| pct(means.0[i]));
    let subsystem_percent = Subsystem::ALL
        .into_iter()
        .map(|s| (s, pct(s.rails().map(|r| means.get(r)).sum())))
        .collect();
    WorkloadPowerTable {
        workload: workload.to_string(),
        rail_mean: means,
        total,
        rail_percent,
        subsystem_percent,
    }
}

/// Builds a power table from one trace per rail, using each trace's sample mean.
pub fn workload_table(
    traces: &BTreeMap<RailName, PowerTrace>,
    workload: &str,
) -> Result<WorkloadPowerTable, AnalysisError> {
    let mut means = RailMeans::zero();
    for rail in RailName::ALL {
        let trace = traces.get(&rail).ok_or(AnalysisError::MissingRail(rail))?;
        means.set(rail, trace.mean().ok_or(AnalysisError::EmptyTrace)?);
    }
    Ok(workload_table_from_means(workload, means))
}
