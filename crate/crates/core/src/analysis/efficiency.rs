//! Benchmark efficiency against a peak model, and strong-scaling summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Peak capabilities of a machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSpec {
    pub cores_per_node: u32,
    /// FLOP/s per core.
    pub peak_flops_per_core: f64,
    pub nodes: u32,
    /// Bytes/s per node.
    pub peak_mem_bw: f64,
}

impl MachineSpec {
    pub fn new(cores_per_node: u32, peak_flops_per_core: f64, nodes: u32, peak_mem_bw: f64) -> Result<Self, AnalysisError> {
        let spec = MachineSpec { cores_per_node, peak_flops_per_core, nodes, peak_mem_bw };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.cores_per_node == 0 || self.nodes == 0 || !positive(self.peak_flops_per_core) || !positive(self.peak_mem_bw) {
            return Err(AnalysisError::InvalidInput(format!("machine spec fields must be positive: {self:?}")));
        }
        Ok(())
    }

    /// Eight nodes of four U74 cores at 1 GFLOP/s each, 7760 MB/s DDR peak.
    pub fn u740_cluster() -> Self {
        MachineSpec { cores_per_node: 4, peak_flops_per_core: 1.0e9, nodes: 8, peak_mem_bw: 7760.0e6 }
    }

    pub fn node_peak_flops(&self) -> f64 {
        self.cores_per_node as f64 * self.peak_flops_per_core
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "unit", content = "value", rename_all = "snake_case")]
pub enum Throughput {
    FlopsPerSec(f64),
    BytesPerSec(f64),
}

impl Throughput {
    pub fn value(self) -> f64 {
        match self {
            Throughput::FlopsPerSec(v) | Throughput::BytesPerSec(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub name: String,
    pub sustained: Throughput,
    #[serde(default)]
    pub sustained_stddev: Option<f64>,
    #[serde(default)]
    pub runtime: Option<Runtime>,
    #[serde(default)]
    pub config: BTreeMap<String, String>,
    pub nodes_used: u32,
}

impl BenchmarkRecord {
    pub fn new(name: impl Into<String>, sustained: Throughput, nodes_used: u32) -> Result<Self, AnalysisError> {
        let rec = BenchmarkRecord {
            name: name.into(),
            sustained,
            sustained_stddev: None,
            runtime: None,
            config: BTreeMap::new(),
            nodes_used,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn flops(name: impl Into<String>, flops: f64, nodes_used: u32) -> Result<Self, AnalysisError> {
        BenchmarkRecord::new(name, Throughput::FlopsPerSec(flops), nodes_used)
    }

    pub fn bandwidth(name: impl Into<String>, bytes_per_sec: f64) -> Result<Self, AnalysisError> {
        BenchmarkRecord::new(name, Throughput::BytesPerSec(bytes_per_sec), 1)
    }

    pub fn with_config(mut self, key: &str, value: impl ToString) -> Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let v = self.sustained.value();
        if !(v.is_finite() && v > 0.0) {
            return Err(AnalysisError::InvalidInput(format!("{}: sustained must be positive, got {v}", self.name)));
        }
        if self.nodes_used == 0 {
            return Err(AnalysisError::InvalidInput(format!("{}: nodes_used must be >= 1", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Efficiency {
    pub fraction: f64,
    /// Sustained exceeds the modelled peak; the peak model is probably wrong.
    pub suspect_peak_model: bool,
}

impl Efficiency {
    fn from_fraction(fraction: f64, what: &str) -> Self {
        let suspect_peak_model = fraction > 1.0;
        if suspect_peak_model {
            log::warn!("{what}: efficiency {fraction:.3} exceeds 1, check the peak model");
        }
        Efficiency { fraction, suspect_peak_model }
    }

    pub fn percent(&self) -> f64 {
        self.fraction * 100.0
    }
}

/// Sustained FLOP/s over the peak of the nodes used.
pub fn flops_efficiency(rec: &BenchmarkRecord, spec: &MachineSpec) -> Result<Efficiency, AnalysisError> {
    rec.validate()?;
    spec.validate()?;
    let Throughput::FlopsPerSec(sustained) = rec.sustained else {
        return Err(AnalysisError::WrongUnit(format!("{} is not a FLOP/s record", rec.name)));
    };
    let peak = rec.nodes_used as f64 * spec.node_peak_flops();
    Ok(Efficiency::from_fraction(sustained / peak, &rec.name))
}

/// Sustained single-node bandwidth over the node's peak memory bandwidth.
pub fn bandwidth_efficiency(rec: &BenchmarkRecord, spec: &MachineSpec) -> Result<Efficiency, AnalysisError> {
    rec.validate()?;
    spec.validate()?;
    let Throughput::BytesPerSec(sustained) = rec.sustained else {
        return Err(AnalysisError::WrongUnit(format!("{} is not a bytes/s record", rec.name)));
    };
    if rec.nodes_used != 1 {
        return Err(AnalysisError::InvalidInput(format!(
            "{}: bandwidth efficiency is per node, record spans {} nodes",
            rec.name, rec.nodes_used
        )));
    }
    Ok(Efficiency::from_fraction(sustained / spec.peak_mem_bw, &rec.name))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingSummary {
    pub nodes: u32,
    pub speedup: f64,
    /// Achieved throughput over perfect linear scaling of the single-node run.
    pub linear_fraction: f64,
}

pub fn scaling_summary(single: &BenchmarkRecord, multi: &BenchmarkRecord) -> Result<ScalingSummary, AnalysisError> {
    single.validate()?;
    multi.validate()?;
    if std::mem::discriminant(&single.sustained) != std::mem::discriminant(&multi.sustained) {
        return Err(AnalysisError::WrongUnit("single and multi records use different units".into()));
    }
    if single.nodes_used != 1 {
        return Err(AnalysisError::InvalidInput(format!(
            "baseline must be a single-node run, got {} nodes",
            single.nodes_used
        )));
    }
    let speedup = multi.sustained.value() / single.sustained.value();
    // speedup / n rather than multi / (n * single) so the identity with the speedup is exact.
    let linear_fraction = speedup / multi.nodes_used as f64;
    Ok(ScalingSummary { nodes: multi.nodes_used, speedup, linear_fraction })
}
