//! Read-only view over either a simulator bundle or a series store directory.

use std::path::{Path, PathBuf};

use clap::Args;
use oda_core::telemetry::{slice_points, Point};
use oda_sim::{read_bundle, Bundle, PhaseRecord};
use oda_transport::{SeriesStore, StoreConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Trace bundle written by `oda sim generate`.
    #[arg(long, value_name = "DIR", conflicts_with = "store", required_unless_present = "store")]
    pub bundle: Option<PathBuf>,
    /// Series store directory written by `oda serve` or `oda sim replay`.
    #[arg(long, value_name = "DIR")]
    pub store: Option<PathBuf>,
    /// Node hostname; defaults to the first node found.
    #[arg(long)]
    pub node: Option<String>,
}

pub enum Dataset {
    Bundle(Box<Bundle>),
    Store(SeriesStore),
}

impl Dataset {
    pub fn open(args: &SourceArgs) -> Result<Self, CliError> {
        match (&args.bundle, &args.store) {
            (Some(dir), _) => Ok(Dataset::Bundle(Box::new(read_bundle(dir)?))),
            (None, Some(dir)) => Self::open_store(dir),
            (None, None) => Err(CliError::config("one of --bundle or --store is required")),
        }
    }

    pub fn open_store(dir: &Path) -> Result<Self, CliError> {
        if !dir.is_dir() {
            return Err(CliError::missing(format!("no store at {}", dir.display())));
        }
        let store = SeriesStore::open(StoreConfig { dir: Some(dir.to_path_buf()), ..Default::default() })?;
        Ok(Dataset::Store(store))
    }

    pub fn nodes(&self) -> Vec<String> {
        match self {
            Dataset::Bundle(b) => b.hostnames().map(String::from).collect(),
            Dataset::Store(s) => {
                let mut v: Vec<String> = s.keys().iter().map(|k| k.topic().node().to_string()).collect();
                v.dedup();
                v.sort();
                v.dedup();
                v
            }
        }
    }

    /// `--node` or the first node, checked to exist.
    pub fn pick_node(&self, node: Option<&str>) -> Result<String, CliError> {
        let nodes = self.nodes();
        match node {
            Some(n) if nodes.iter().any(|x| x == n) => Ok(n.to_string()),
            Some(n) => Err(CliError::missing(format!("node {n} not found (have {})", nodes.join(", ")))),
            None => nodes.into_iter().next().ok_or_else(|| CliError::missing("no series found")),
        }
    }

    /// `(core, metric)` of every series on `node`.
    pub fn metrics(&self, node: &str) -> Vec<(Option<u32>, String)> {
        match self {
            Dataset::Bundle(b) => b
                .node(node)
                .map(|n| n.signals.iter().map(|(s, _)| (s.core, s.metric.clone())).collect())
                .unwrap_or_default(),
            Dataset::Store(s) => s
                .keys()
                .iter()
                .map(|k| k.topic())
                .filter(|t| t.node() == node)
                .map(|t| (t.core_id(), t.metric().to_string()))
                .collect(),
        }
    }

    /// All points of one series, whichever plugin publishes it.
    pub fn series(&self, node: &str, metric: &str, core: Option<u32>) -> Result<Vec<Point>, CliError> {
        let found = match self {
            Dataset::Bundle(b) => b.node(node).and_then(|n| {
                n.signals.iter().find(|(s, _)| s.metric == metric && s.core == core).map(|(_, p)| p.clone())
            }),
            Dataset::Store(s) => {
                let key = s.keys().into_iter().find(|k| {
                    let t = k.topic();
                    t.node() == node && t.metric() == metric && t.core_id() == core
                });
                match key {
                    Some(k) => Some(s.get(&k)?),
                    None => None,
                }
            }
        };
        let core = core.map(|c| format!(" core {c}")).unwrap_or_default();
        match found {
            Some(p) if !p.is_empty() => Ok(p),
            Some(_) => Err(CliError::missing(format!("{node}{core}: {metric} is empty"))),
            None => Err(CliError::missing(format!("{node}{core}: no {metric} series"))),
        }
    }

    /// Generated timeline of `node`, bundles only.
    pub fn phases(&self, node: &str) -> Option<&[PhaseRecord]> {
        match self {
            Dataset::Bundle(b) => b.manifest.nodes.iter().find(|n| n.hostname == node).map(|n| n.phases.as_slice()),
            Dataset::Store(_) => None,
        }
    }

    /// Epoch seconds that phase offsets are relative to, bundles only.
    pub fn epoch(&self) -> Option<f64> {
        match self {
            Dataset::Bundle(b) => Some(b.manifest.start),
            Dataset::Store(_) => None,
        }
    }
}

/// A `[start, end)` span in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub start: f64,
    pub end: f64,
}

impl Span {
    pub const ALL: Span = Span { start: f64::NEG_INFINITY, end: f64::INFINITY };

    pub fn slice<'a>(&self, points: &'a [Point]) -> &'a [Point] {
        slice_points(points, self.start, self.end)
    }
}

/// Parses `FROM:TO` seconds; either side may be empty.
pub fn parse_offsets(s: &str) -> Result<(Option<f64>, Option<f64>), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected FROM:TO, got {s:?}"))?;
    let num = |x: &str| -> Result<Option<f64>, String> {
        let x = x.trim();
        if x.is_empty() {
            Ok(None)
        } else {
            x.parse::<f64>().map(Some).map_err(|_| format!("bad number {x:?}"))
        }
    };
    Ok((num(a)?, num(b)?))
}

/// Resolves offsets relative to `origin` into an absolute span.
pub fn span_from(origin: f64, from: Option<f64>, to: Option<f64>) -> Result<Span, CliError> {
    let span = Span {
        start: from.map_or(f64::NEG_INFINITY, |f| origin + f),
        end: to.map_or(f64::INFINITY, |t| origin + t),
    };
    if !(span.start < span.end) {
        return Err(CliError::config(format!("empty window {from:?}..{to:?}")));
    }
    Ok(span)
}
