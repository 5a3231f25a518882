//! Hierarchical MQTT topic paths.
//!
//! Every metric travels on a topic of the form
//!
//! ```txt
//! org/<org>/cluster/<cluster>/node/<host>/plugin/<plugin>/chnl/data[/core/<id>]/<metric>
//! ```
//!
//! The `core/<id>` pair is present for per-core counter plugins only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TelemetryError;

/// Publishing plugin. Determines the topic shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Plugin {
    /// Per-core hardware performance counters.
    #[serde(rename = "pmu_pub")]
    PmuPub,
    /// Operating-system statistics and temperatures.
    #[serde(rename = "stats_pub")]
    StatsPub,
    /// Per-rail instantaneous power, metric names `power.<rail>`.
    #[serde(rename = "power_pub")]
    PowerPub,
}

impl Plugin {
    pub const ALL: [Plugin; 3] = [Plugin::PmuPub, Plugin::StatsPub, Plugin::PowerPub];

    pub fn as_str(self) -> &'static str {
        match self {
            Plugin::PmuPub => "pmu_pub",
            Plugin::StatsPub => "stats_pub",
            Plugin::PowerPub => "power_pub",
        }
    }

    /// Whether topics for this plugin carry a `core/<id>` pair.
    pub fn is_per_core(self) -> bool {
        matches!(self, Plugin::PmuPub)
    }
}

impl fmt::Display for Plugin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Plugin {
    type Err = TelemetryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pmu_pub" => Ok(Plugin::PmuPub),
            "stats_pub" => Ok(Plugin::StatsPub),
            "power_pub" => Ok(Plugin::PowerPub),
            other => Err(TelemetryError::UnknownPlugin(other.to_string())),
        }
    }
}

/// A validated topic address. Construct with [`TopicPath::new`] or [`decode_topic`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopicPath {
    org: String,
    cluster: String,
    node: String,
    plugin: Plugin,
    core_id: Option<u32>,
    metric: String,
}

fn check_segment(what: &str, s: &str) -> Result<(), TelemetryError> {
    if s.is_empty() {
        return Err(TelemetryError::InvalidTopic(format!("{what} segment is empty")));
    }
    // '+' and '#' are MQTT wildcards and never legal in a published topic name.
    if let Some(c) = s.chars().find(|c| matches!(c, '/' | '+' | '#' | '\0')) {
        return Err(TelemetryError::InvalidTopic(format!(
            "{what} segment {s:?} contains {c:?}"
        )));
    }
    Ok(())
}

impl TopicPath {
    pub fn new(
        org: impl Into<String>,
        cluster: impl Into<String>,
        node: impl Into<String>,
        plugin: Plugin,
        core_id: Option<u32>,
        metric: impl Into<String>,
    ) -> Result<Self, TelemetryError> {
        let t = TopicPath {
            org: org.into(),
            cluster: cluster.into(),
            node: node.into(),
            plugin,
            core_id,
            metric: metric.into(),
        };
        check_segment("org", &t.org)?;
        check_segment("cluster", &t.cluster)?;
        check_segment("node", &t.node)?;
        check_segment("metric", &t.metric)?;
        match (plugin.is_per_core(), core_id) {
            (true, None) => Err(TelemetryError::InvalidTopic(format!(
                "plugin {plugin} requires a core id"
            ))),
            (false, Some(id)) => Err(TelemetryError::InvalidTopic(format!(
                "plugin {plugin} does not take a core id (got {id})"
            ))),
            _ => Ok(t),
        }
    }

    pub fn org(&self) -> &str {
        &self.org
    }

    pub fn cluster(&self) -> &str {
        &self.cluster
    }

    pub fn node(&self) -> &str {
        &self.node
    }

    pub fn plugin(&self) -> Plugin {
        self.plugin
    }

    pub fn core_id(&self) -> Option<u32> {
        self.core_id
    }

    pub fn metric(&self) -> &str {
        &self.metric
    }

    /// Same address on another node.
    pub fn with_node(&self, node: &str) -> Result<Self, TelemetryError> {
        TopicPath::new(
            self.org.clone(),
            self.cluster.clone(),
            node,
            self.plugin,
            self.core_id,
            self.metric.clone(),
        )
    }
}

impl fmt::Display for TopicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "org/{}/cluster/{}/node/{}/plugin/{}/chnl/data/",
            self.org, self.cluster, self.node, self.plugin
        )?;
        if let Some(id) = self.core_id {
            write!(f, "core/{id}/")?;
        }
        f.write_str(&self.metric)
    }
}

impl FromStr for TopicPath {
    type Err = TelemetryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        decode_topic(s)
    }
}

pub fn encode_topic(t: &TopicPath) -> String {
    t.to_string()
}

fn malformed(s: &str, why: impl fmt::Display) -> TelemetryError {
    TelemetryError::MalformedTopic(format!("{s:?}: {why}"))
}

/// Canonical decimal only: no sign, no leading zeros, so that re-encoding is the identity.
fn parse_core_id(s: &str) -> Option<u32> {
    let canonical = !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_digit())
        && (s == "0" || !s.starts_with('0'));
    if canonical {
        s.parse().ok()
    } else {
        None
    }
}

pub fn decode_topic(s: &str) -> Result<TopicPath, TelemetryError> {
    let parts: Vec<&str> = s.split('/').collect();
    if parts.len() != 11 && parts.len() != 13 {
        return Err(malformed(s, format!("{} segments", parts.len())));
    }
    for (idx, keyword) in [(0, "org"), (2, "cluster"), (4, "node"), (6, "plugin"), (8, "chnl"), (9, "data")] {
        if parts[idx] != keyword {
            return Err(malformed(s, format!("expected {keyword:?} at segment {idx}")));
        }
    }
    let plugin: Plugin = parts[7].parse().map_err(|_| malformed(s, "unknown plugin"))?;
    let (core_id, metric) = if parts.len() == 13 {
        if parts[10] != "core" {
            return Err(malformed(s, "expected \"core\" at segment 10"));
        }
        let id = parse_core_id(parts[11]).ok_or_else(|| malformed(s, "core id is not a canonical integer"))?;
        (Some(id), parts[12])
    } else {
        (None, parts[10])
    };
    TopicPath::new(parts[1], parts[3], parts[5], plugin, core_id, metric)
        .map_err(|e| malformed(s, e))
}
