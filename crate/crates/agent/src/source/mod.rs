//! Metric sources behind each sampler.

mod fs;
mod perf;
mod synthetic;

use std::path::{Path, PathBuf};

use oda_core::telemetry::{Plugin, RailName, SensorMap};
use thiserror::Error;

pub use fs::FilesystemSource;
pub use perf::PerfSource;
pub use synthetic::SyntheticGenerator;

use crate::config::SourceBackend;

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("{name}: cannot read {path}: {source}")]
    Missing { name: String, path: PathBuf, source: std::io::Error },
    #[error("{name}: unparsable contents of {path}")]
    Parse { name: String, path: PathBuf },
    #[error("no channel for {0}")]
    Unsupported(String),
    /// Rate metrics need two readings before they produce a value.
    #[error("{0}: waiting for a second reading")]
    Warmup(String),
    #[error("perf counter {counter} on core {core}: {reason}")]
    Perf { counter: String, core: u32, reason: String },
    #[error("{0}")]
    Replay(String),
}

/// Reads one metric value. Each sampler owns its source exclusively.
pub trait Source: Send {
    /// `core` is given for per-core plugins; `now` is the read timestamp.
    fn read(&mut self, metric: &str, core: Option<u32>, now: f64) -> Result<f64, SourceError>;
}

/// Builds the source a sampler reads from. `salt` decorrelates the random
/// streams of synthetic sources that share a seed.
pub fn open_source(backend: &SourceBackend, plugin: Plugin, salt: &str) -> Result<Box<dyn Source>, SourceError> {
    Ok(match backend {
        SourceBackend::Filesystem { root, sensors, rails } => {
            Box::new(FilesystemSource::new(root.clone(), sensors.clone(), rails.clone()))
        }
        SourceBackend::Perf => Box::new(PerfSource::new()),
        SourceBackend::Synthetic(s) => Box::new(SyntheticGenerator::new(s, plugin, salt)?),
    })
}

/// Joins an absolute sysfs/procfs path onto an alternative root.
pub(crate) fn rooted(root: &Path, path: &Path) -> PathBuf {
    root.join(path.strip_prefix("/").unwrap_or(path))
}

/// Reads an hwmon millidegree file.
pub fn read_millidegrees(name: &str, path: &Path) -> Result<f64, SourceError> {
    let text = std::fs::read_to_string(path).map_err(|source| SourceError::Missing {
        name: name.to_string(),
        path: path.to_path_buf(),
        source,
    })?;
    let raw: i64 = text
        .trim()
        .parse()
        .map_err(|_| SourceError::Parse { name: name.to_string(), path: path.to_path_buf() })?;
    Ok(raw as f64 / 1000.0)
}

/// Every sensor of `sensors`, in name order, read under `root`.
pub fn read_thermal(sensors: &SensorMap, root: &Path) -> Vec<(String, Result<f64, SourceError>)> {
    sensors
        .iter()
        .map(|(name, path)| (name.to_string(), read_millidegrees(name, &rooted(root, path))))
        .collect()
}

/// Instantaneous power of one rail in mW.
pub fn read_rail_power(rail: RailName, source: &mut dyn Source, now: f64) -> Result<f64, SourceError> {
    source.read(&rail.metric_name(), None, now)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn millidegrees() {
        let dir = tempfile::tempdir().unwrap();
        let hot = dir.path().join("sys/class/hwmon/hwmon1/temp2_input");
        std::fs::create_dir_all(hot.parent().unwrap()).unwrap();
        std::fs::write(&hot, "107000\n").unwrap();
        let cool = dir.path().join("sys/class/hwmon/hwmon1/temp1_input");
        std::fs::write(&cool, "39000\n").unwrap();

        let got = read_thermal(&SensorMap::board_default(), dir.path());
        let by_name: std::collections::BTreeMap<_, _> = got.into_iter().collect();
        assert_eq!(by_name["cpu_temp"].as_ref().unwrap(), &107.0);
        assert_eq!(by_name["mb_temp"].as_ref().unwrap(), &39.0);
        assert!(matches!(&by_name["nvme_temp"], Err(SourceError::Missing { name, .. }) if name == "nvme_temp"));
    }

    #[test]
    fn garbage_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t");
        std::fs::write(&p, "hot\n").unwrap();
        assert!(matches!(read_millidegrees("x", &p), Err(SourceError::Parse { .. })));
    }
}
