//! Agent configuration file.
//!
//! ```toml
//! node = "mc01"
//! org = "unibo"
//! cluster = "montecimone"
//! broker = "10.0.0.1:1883"
//!
//! [[sampler]]
//! plugin = "pmu_pub"
//! period = 0.5
//! metrics = ["cycle", "instret"]
//! cores = [0, 1, 2, 3]
//! source = { kind = "perf" }
//!
//! [[sampler]]
//! plugin = "stats_pub"
//! period = 5.0
//! source = { kind = "filesystem", root = "/" }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use oda_core::profiles::Workload;
use oda_core::telemetry::{Plugin, RailName, SensorMap, TopicPath};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{default_metrics, is_known_metric};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing agent config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown metric {metric:?} for plugin {plugin}")]
    UnknownMetric { plugin: Plugin, metric: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("opening source: {0}")]
    Source(#[from] crate::source::SourceError),
}

/// Per-rail power channel on a real node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RailChannel {
    /// File holding instantaneous power in mW.
    Power { path: PathBuf },
    /// File holding the shunt voltage drop in mV; power is
    /// `mv / shunt_ohms * rail_volts` mW.
    Shunt { path: PathBuf, shunt_ohms: f64, rail_volts: f64 },
}

/// Synthetic data for desk runs and tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSource {
    /// Every metric reads this value.
    pub constant: Option<f64>,
    /// Rail means come from this workload's reference column.
    pub workload: Workload,
    /// Relative standard deviation of gaussian noise on rails and stats.
    pub noise: f64,
    pub seed: u64,
    /// Counter increments per second, per core.
    pub counter_rates: BTreeMap<String, f64>,
    /// Per-metric mean for stats metrics; unlisted ones use built-in levels.
    pub stats: BTreeMap<String, f64>,
    /// Per-metric CSV traces ("timestamp,value") replayed relative to start,
    /// looping at the end.
    pub replay: BTreeMap<String, PathBuf>,
}

impl Default for SyntheticSource {
    fn default() -> Self {
        SyntheticSource {
            constant: None,
            workload: Workload::Idle,
            noise: 0.01,
            seed: 0,
            counter_rates: BTreeMap::from([("cycle".into(), 1.0e9), ("instret".into(), 0.45e9)]),
            stats: BTreeMap::new(),
            replay: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceBackend {
    /// procfs, sysfs and hwmon files under `root`.
    Filesystem {
        #[serde(default = "root_dir")]
        root: PathBuf,
        #[serde(default = "SensorMap::board_default")]
        sensors: SensorMap,
        #[serde(default)]
        rails: BTreeMap<RailName, RailChannel>,
    },
    /// Hardware counters through perf_event_open.
    Perf,
    Synthetic(SyntheticSource),
}

fn root_dir() -> PathBuf {
    PathBuf::from("/")
}

impl Default for SourceBackend {
    fn default() -> Self {
        SourceBackend::Synthetic(SyntheticSource::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub plugin: Plugin,
    /// Seconds between samples.
    pub period: f64,
    /// Defaults to the plugin's whole catalog.
    #[serde(default)]
    pub metrics: Vec<String>,
    /// Cores sampled by `pmu_pub`.
    #[serde(default = "all_cores")]
    pub cores: Vec<u32>,
    #[serde(default)]
    pub source: SourceBackend,
}

fn all_cores() -> Vec<u32> {
    vec![0, 1, 2, 3]
}

impl SamplerSpec {
    pub fn new(plugin: Plugin, period: f64, source: SourceBackend) -> Self {
        SamplerSpec { plugin, period, metrics: default_metrics(plugin), cores: all_cores(), source }
    }

    pub fn with_metrics<S: Into<String>>(mut self, metrics: impl IntoIterator<Item = S>) -> Self {
        self.metrics = metrics.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_cores(mut self, cores: impl IntoIterator<Item = u32>) -> Self {
        self.cores = cores.into_iter().collect();
        self
    }

    fn validate(&mut self) -> Result<(), ConfigError> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(ConfigError::Invalid(format!("{} period must be positive, got {}", self.plugin, self.period)));
        }
        if self.metrics.is_empty() {
            self.metrics = default_metrics(self.plugin);
        }
        for m in &self.metrics {
            if !is_known_metric(self.plugin, m) {
                return Err(ConfigError::UnknownMetric { plugin: self.plugin, metric: m.clone() });
            }
        }
        if self.plugin == Plugin::PmuPub && self.cores.is_empty() {
            return Err(ConfigError::Invalid("pmu_pub needs at least one core".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub node: String,
    #[serde(default = "default_org")]
    pub org: String,
    #[serde(default = "default_cluster")]
    pub cluster: String,
    /// `host:port` of the MQTT broker; absent means an in-process bus.
    #[serde(default)]
    pub broker: Option<String>,
    /// Samples held per plugin while the transport is down.
    #[serde(default = "default_buffer")]
    pub buffer_limit: usize,
    #[serde(rename = "sampler")]
    pub samplers: Vec<SamplerSpec>,
}

fn default_org() -> String {
    "unibo".into()
}

fn default_cluster() -> String {
    "montecimone".into()
}

fn default_buffer() -> usize {
    10_000
}

impl AgentConfig {
    pub fn new(node: impl Into<String>, samplers: Vec<SamplerSpec>) -> Self {
        AgentConfig {
            node: node.into(),
            org: default_org(),
            cluster: default_cluster(),
            broker: None,
            buffer_limit: default_buffer(),
            samplers,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: AgentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&mut self) -> Result<(), ConfigError> {
        // Topic segments must be valid; probe with a throwaway topic.
        TopicPath::new(&self.org, &self.cluster, &self.node, Plugin::StatsPub, None, "probe")
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.samplers.is_empty() {
            return Err(ConfigError::Invalid("no samplers configured".into()));
        }
        if self.buffer_limit == 0 {
            return Err(ConfigError::Invalid("buffer_limit must be at least 1".into()));
        }
        for s in &mut self.samplers {
            s.validate()?;
        }
        Ok(())
    }

    pub fn topic(&self, plugin: Plugin, core: Option<u32>, metric: &str) -> TopicPath {
        TopicPath::new(&self.org, &self.cluster, &self.node, plugin, core, metric)
            .expect("config identity and metric names are validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example() {
        let cfg = AgentConfig::from_toml(
            r#"
            node = "mc01"
            broker = "10.0.0.1:1883"

            [[sampler]]
            plugin = "pmu_pub"
            period = 0.5
            metrics = ["cycle", "instret"]
            source = { kind = "perf" }

            [[sampler]]
            plugin = "stats_pub"
            period = 5.0
            source = { kind = "filesystem", root = "/tmp/fake" }

            [[sampler]]
            plugin = "power_pub"
            period = 0.001
            [sampler.source]
            kind = "synthetic"
            workload = "HPL"
            noise = 0.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.org, "unibo");
        assert_eq!(cfg.samplers.len(), 3);
        assert_eq!(cfg.samplers[0].cores, vec![0, 1, 2, 3]);
        assert_eq!(cfg.samplers[1].metrics.len(), 28);
        assert_eq!(cfg.samplers[2].metrics.len(), 9);
        match &cfg.samplers[1].source {
            SourceBackend::Filesystem { root, sensors, .. } => {
                assert_eq!(root, Path::new("/tmp/fake"));
                assert_eq!(sensors, &SensorMap::board_default());
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(&cfg.samplers[2].source, SourceBackend::Synthetic(s) if s.workload == Workload::Hpl));
    }

    #[test]
    fn rejects_unknown_metric_and_bad_period() {
        let unknown = r#"
            node = "mc01"
            [[sampler]]
            plugin = "stats_pub"
            period = 5.0
            metrics = ["load_avg.2m"]
        "#;
        assert!(matches!(AgentConfig::from_toml(unknown), Err(ConfigError::UnknownMetric { .. })));
        let bad = r#"
            node = "mc01"
            [[sampler]]
            plugin = "stats_pub"
            period = 0.0
        "#;
        assert!(matches!(AgentConfig::from_toml(bad), Err(ConfigError::Invalid(_))));
        let plugin = r#"
            node = "mc01"
            [[sampler]]
            plugin = "dstat_pub"
            period = 1.0
        "#;
        assert!(matches!(AgentConfig::from_toml(plugin), Err(ConfigError::Parse(_))));
    }
}
