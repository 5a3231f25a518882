//! On-disk trace bundle.
//!
//! ```text
//! <dir>/manifest.json
//! <dir>/<host>/<plugin>[.core<N>].<metric>.csv   "timestamp,value" rows
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use oda_core::profiles::{BootSchedule, RailMeans};
use oda_core::telemetry::{Plugin, Point, TopicPath};
use serde::{Deserialize, Serialize};

use crate::scenario::{ProfileName, SimScenario};
use crate::SimError;

const MANIFEST: &str = "manifest.json";
const FORMAT: u32 = 1;

/// A series within one node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signal {
    pub plugin: Plugin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<u32>,
    pub metric: String,
}

impl Signal {
    pub fn new(plugin: Plugin, core: Option<u32>, metric: impl Into<String>) -> Self {
        Signal { plugin, core, metric: metric.into() }
    }

    pub fn file_name(&self) -> String {
        match self.core {
            Some(c) => format!("{}.core{c}.{}.csv", self.plugin, self.metric),
            None => format!("{}.{}.csv", self.plugin, self.metric),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    #[serde(flatten)]
    pub signal: Signal,
    /// Path relative to the bundle directory.
    pub file: String,
    pub samples: usize,
}

/// A timeline segment as generated, offsets in seconds from the scenario start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub workload: ProfileName,
    pub start: f64,
    pub end: f64,
    pub noise: f64,
    pub means: RailMeans,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boot: Option<BootSchedule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeManifest {
    pub hostname: String,
    pub duration: f64,
    pub phases: Vec<PhaseRecord>,
    pub signals: Vec<SignalRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub org: String,
    pub cluster: String,
    /// Epoch seconds of offset 0.
    pub start: f64,
    pub scenario: SimScenario,
    pub nodes: Vec<NodeManifest>,
}

impl Manifest {
    pub fn new(scenario: &SimScenario, nodes: Vec<NodeManifest>) -> Self {
        Manifest {
            format: FORMAT,
            org: scenario.org.clone(),
            cluster: scenario.cluster.clone(),
            start: scenario.start,
            scenario: scenario.clone(),
            nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrace {
    pub hostname: String,
    pub signals: Vec<(Signal, Vec<Point>)>,
}

impl NodeTrace {
    pub fn get(&self, signal: &Signal) -> Option<&[Point]> {
        self.signals.iter().find(|(s, _)| s == signal).map(|(_, p)| p.as_slice())
    }

    pub fn total_samples(&self) -> usize {
        self.signals.iter().map(|(_, p)| p.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub manifest: Manifest,
    pub nodes: Vec<NodeTrace>,
}

impl Bundle {
    pub fn node(&self, hostname: &str) -> Option<&NodeTrace> {
        self.nodes.iter().find(|n| n.hostname == hostname)
    }

    pub fn hostnames(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.hostname.as_str())
    }

    pub fn topic(&self, hostname: &str, signal: &Signal) -> Result<TopicPath, SimError> {
        TopicPath::new(&self.manifest.org, &self.manifest.cluster, hostname, signal.plugin, signal.core, &signal.metric)
            .map_err(|e| SimError::Bundle(e.to_string()))
    }

    pub fn total_samples(&self) -> usize {
        self.nodes.iter().map(NodeTrace::total_samples).sum()
    }

    /// Checks that the manifest and the traces agree and every series is
    /// strictly increasing in time.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Bundle(m));
        if self.manifest.format != FORMAT {
            return bad(format!("unsupported format {}", self.manifest.format));
        }
        if self.manifest.nodes.len() != self.nodes.len() {
            return bad("manifest and trace node counts differ".into());
        }
        for (m, n) in self.manifest.nodes.iter().zip(&self.nodes) {
            if m.hostname != n.hostname || m.signals.len() != n.signals.len() {
                return bad(format!("manifest entry for {} does not match its traces", n.hostname));
            }
            for (rec, (sig, pts)) in m.signals.iter().zip(&n.signals) {
                if &rec.signal != sig || rec.samples != pts.len() {
                    return bad(format!("{}/{}: manifest does not match trace", n.hostname, rec.file));
                }
                self.topic(&n.hostname, sig)?;
                if pts.windows(2).any(|w| !(w[0].t < w[1].t)) {
                    return bad(format!("{}/{}: timestamps not strictly increasing", n.hostname, rec.file));
                }
                if pts.iter().any(|p| !p.v.is_finite() || !(p.t > 0.0 && p.t.is_finite())) {
                    return bad(format!("{}/{}: non-finite sample", n.hostname, rec.file));
                }
            }
        }
        Ok(())
    }
}

pub fn write_bundle(bundle: &Bundle, dir: &Path) -> Result<(), SimError> {
    fs::create_dir_all(dir)?;
    for node in &bundle.nodes {
        let node_dir = dir.join(&node.hostname);
        fs::create_dir_all(&node_dir)?;
        for (sig, pts) in &node.signals {
            let mut w = BufWriter::new(File::create(node_dir.join(sig.file_name()))?);
            writeln!(w, "timestamp,value")?;
            for p in pts {
                writeln!(w, "{:.6},{:.6}", p.t, p.v)?;
            }
            w.flush()?;
        }
    }
    let json = serde_json::to_vec_pretty(&bundle.manifest).map_err(|e| SimError::Bundle(e.to_string()))?;
    fs::write(dir.join(MANIFEST), json)?;
    Ok(())
}

pub fn read_bundle(dir: &Path) -> Result<Bundle, SimError> {
    let text = fs::read(dir.join(MANIFEST))?;
    let manifest: Manifest =
        serde_json::from_slice(&text).map_err(|e| SimError::Bundle(format!("{MANIFEST}: {e}")))?;
    let mut nodes = Vec::with_capacity(manifest.nodes.len());
    for m in &manifest.nodes {
        let mut signals = Vec::with_capacity(m.signals.len());
        for rec in &m.signals {
            if rec.file.contains("..") || Path::new(&rec.file).is_absolute() {
                return Err(SimError::Bundle(format!("refusing file path {:?}", rec.file)));
            }
            signals.push((rec.signal.clone(), read_csv(&dir.join(&rec.file))?));
        }
        nodes.push(NodeTrace { hostname: m.hostname.clone(), signals });
    }
    let bundle = Bundle { manifest, nodes };
    bundle.validate()?;
    Ok(bundle)
}

fn read_csv(path: &Path) -> Result<Vec<Point>, SimError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| SimError::Bundle(format!("{}: {e}", path.display())))?;
    let header = rdr.headers().map_err(|e| SimError::Bundle(format!("{}: {e}", path.display())))?;
    if header.len() != 2 || &header[0] != "timestamp" || &header[1] != "value" {
        return Err(SimError::Bundle(format!("{}: expected header timestamp,value", path.display())));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| SimError::Bundle(format!("{}: {e}", path.display())))?;
        let num = |j: usize| {
            row.get(j)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| SimError::Bundle(format!("{}: bad row {}", path.display(), i + 2)))
        };
        out.push(Point::new(num(0)?, num(1)?));
    }
    Ok(out)
}
