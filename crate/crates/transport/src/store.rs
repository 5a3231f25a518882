//! Append-only per-series log, kept in memory and optionally mirrored to disk.
//!
//! On disk every series owns a directory named after its percent-encoded key,
//! holding one `<segment>.log` file per `segment_span` seconds of data:
//!
//! ```text
//! # timestamp;value
//! 1650000000.5;3075.25
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use oda_core::telemetry::{decode_topic, encode_topic, slice_points, Point, TopicPath};
use parking_lot::{Mutex, RwLock};
use percent_encoding::{percent_decode_str, utf8_percent_encode, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const HEADER: &str = "# timestamp;value";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid series key {0:?}")]
    InvalidKey(String),
    #[error("unknown series {0}")]
    UnknownSeries(String),
    #[error("bad range [{start}, {end}]")]
    BadRange { start: f64, end: f64 },
    #[error("duplicate sample at t={t} in {key}")]
    Duplicate { key: String, t: f64 },
    #[error("out-of-order sample at t={t} (last {last}) in {key}")]
    OutOfOrder { key: String, t: f64, last: f64 },
    #[error("non-finite sample in {0}")]
    NonFinite(String),
    #[error("corrupt segment {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Canonical topic string naming one series.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SeriesKey(String);

impl SeriesKey {
    pub fn new(s: &str) -> Result<Self, StoreError> {
        let topic = decode_topic(s).map_err(|_| StoreError::InvalidKey(s.to_string()))?;
        Ok(SeriesKey(encode_topic(&topic)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn topic(&self) -> TopicPath {
        decode_topic(&self.0).expect("series keys are validated on construction")
    }

    fn dir_name(&self) -> String {
        utf8_percent_encode(&self.0, NON_ALPHANUMERIC).to_string()
    }
}

impl From<&TopicPath> for SeriesKey {
    fn from(t: &TopicPath) -> Self {
        SeriesKey(encode_topic(t))
    }
}

impl TryFrom<String> for SeriesKey {
    type Error = StoreError;

    fn try_from(s: String) -> Result<Self, StoreError> {
        SeriesKey::new(&s)
    }
}

impl From<SeriesKey> for String {
    fn from(k: SeriesKey) -> String {
        k.0
    }
}

impl FromStr for SeriesKey {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, StoreError> {
        SeriesKey::new(s)
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoreConfig {
    /// Mirror every series to files under this directory.
    pub dir: Option<PathBuf>,
    /// Seconds of data per on-disk segment; also the truncation granularity.
    pub segment_span: f64,
    /// Keep at least this many seconds behind each series' newest sample.
    /// `None` keeps everything.
    pub retention: Option<f64>,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig { dir: None, segment_span: 3600.0, retention: None }
    }
}

struct SegmentWriter {
    index: i64,
    out: BufWriter<File>,
}

struct Series {
    points: Vec<Point>,
    dir: Option<PathBuf>,
    writer: Option<SegmentWriter>,
}

fn segment_of(t: f64, span: f64) -> i64 {
    (t / span).floor() as i64
}

impl Series {
    fn write(&mut self, p: Point, span: f64) -> io::Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let index = segment_of(p.t, span);
        if self.writer.as_ref().map(|w| w.index) != Some(index) {
            if let Some(mut w) = self.writer.take() {
                w.out.flush()?;
            }
            let path = dir.join(format!("{index}.log"));
            let fresh = !path.exists();
            let torn = !fresh && !ends_with_newline(&path)?;
            let file = OpenOptions::new().create(true).append(true).open(&path)?;
            let mut out = BufWriter::new(file);
            if fresh {
                writeln!(out, "{HEADER}")?;
            } else if torn {
                writeln!(out)?;
            }
            self.writer = Some(SegmentWriter { index, out });
        }
        let w = self.writer.as_mut().expect("writer opened above");
        writeln!(w.out, "{};{}", p.t, p.v)
    }

    fn flush(&mut self) -> io::Result<()> {
        match &mut self.writer {
            Some(w) => w.out.flush(),
            None => Ok(()),
        }
    }

    /// Drops whole segments that end before `cutoff`.
    fn truncate(&mut self, cutoff: f64, span: f64) -> io::Result<()> {
        let keep_from = segment_of(cutoff, span);
        let first_kept = self.points.partition_point(|p| segment_of(p.t, span) < keep_from);
        if first_kept == 0 {
            return Ok(());
        }
        self.points.drain(..first_kept);
        if let Some(dir) = &self.dir {
            for (index, path) in segment_files(dir)? {
                if index < keep_from {
                    fs::remove_file(path)?;
                }
            }
        }
        Ok(())
    }
}

fn ends_with_newline(path: &Path) -> io::Result<bool> {
    let mut f = File::open(path)?;
    let len = f.metadata()?.len();
    if len == 0 {
        return Ok(true);
    }
    f.seek(SeekFrom::Start(len - 1))?;
    let mut last = [0u8];
    f.read_exact(&mut last)?;
    Ok(last[0] == b'\n')
}

fn segment_files(dir: &Path) -> io::Result<Vec<(i64, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let index = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix(".log"))
            .and_then(|n| n.parse::<i64>().ok());
        if let Some(index) = index {
            out.push((index, path));
        }
    }
    out.sort();
    Ok(out)
}

fn read_segment(path: &Path, points: &mut Vec<Point>) -> Result<(), StoreError> {
    let corrupt = |reason: String| StoreError::Corrupt { path: path.to_path_buf(), reason };
    let reader = BufReader::new(File::open(path)?);
    for line in reader.lines() {
        let line = line?;
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let parsed = line
            .split_once(';')
            .and_then(|(t, v)| Some(Point::new(t.parse().ok()?, v.parse().ok()?)));
        let Some(p) = parsed else {
            // Torn record from an interrupted write.
            log::warn!("{}: skipping unreadable record {line:?}", path.display());
            continue;
        };
        if let Some(last) = points.last() {
            if p.t <= last.t {
                return Err(corrupt(format!("timestamp {} after {}", p.t, last.t)));
            }
        }
        points.push(p);
    }
    Ok(())
}

/// Map of series key to time-ordered samples.
///
/// Each series sits behind its own lock: appends to one series serialize, and
/// readers always see a consistent prefix.
pub struct SeriesStore {
    config: StoreConfig,
    series: RwLock<BTreeMap<SeriesKey, Arc<Mutex<Series>>>>,
}

impl Default for SeriesStore {
    fn default() -> Self {
        SeriesStore::in_memory()
    }
}

impl SeriesStore {
    pub fn in_memory() -> Self {
        SeriesStore { config: StoreConfig::default(), series: RwLock::new(BTreeMap::new()) }
    }

    /// Opens (or creates) a store, reloading any series found under `config.dir`.
    pub fn open(config: StoreConfig) -> Result<Self, StoreError> {
        let mut map = BTreeMap::new();
        if let Some(root) = &config.dir {
            fs::create_dir_all(root)?;
            for entry in fs::read_dir(root)? {
                let path = entry?.path();
                if !path.is_dir() {
                    continue;
                }
                let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                    continue;
                };
                let decoded = percent_decode_str(name).decode_utf8_lossy();
                let Ok(key) = SeriesKey::new(&decoded) else {
                    log::warn!("skipping unrecognised series directory {}", path.display());
                    continue;
                };
                let mut points = Vec::new();
                for (_, seg) in segment_files(&path)? {
                    read_segment(&seg, &mut points)?;
                }
                let series = Series { points, dir: Some(path), writer: None };
                map.insert(key, Arc::new(Mutex::new(series)));
            }
        }
        Ok(SeriesStore { config, series: RwLock::new(map) })
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    fn get_or_create(&self, key: &SeriesKey) -> Result<Arc<Mutex<Series>>, StoreError> {
        if let Some(s) = self.series.read().get(key) {
            return Ok(s.clone());
        }
        let mut map = self.series.write();
        if let Some(s) = map.get(key) {
            return Ok(s.clone());
        }
        let dir = match &self.config.dir {
            Some(root) => {
                let dir = root.join(key.dir_name());
                fs::create_dir_all(&dir)?;
                Some(dir)
            }
            None => None,
        };
        let s = Arc::new(Mutex::new(Series { points: Vec::new(), dir, writer: None }));
        map.insert(key.clone(), s.clone());
        Ok(s)
    }

    pub fn append(&self, key: &SeriesKey, t: f64, v: f64) -> Result<(), StoreError> {
        if !t.is_finite() || !v.is_finite() {
            return Err(StoreError::NonFinite(key.to_string()));
        }
        let series = self.get_or_create(key)?;
        let mut s = series.lock();
        if let Some(last) = s.points.last() {
            if t == last.t {
                return Err(StoreError::Duplicate { key: key.to_string(), t });
            }
            if t < last.t {
                return Err(StoreError::OutOfOrder { key: key.to_string(), t, last: last.t });
            }
        }
        let p = Point::new(t, v);
        s.write(p, self.config.segment_span)?;
        s.points.push(p);
        if let Some(horizon) = self.config.retention {
            s.truncate(t - horizon, self.config.segment_span)?;
        }
        Ok(())
    }

    /// Samples with `start <= t <= end`, ascending.
    pub fn query_range(&self, key: &SeriesKey, start: f64, end: f64) -> Result<Vec<Point>, StoreError> {
        if start.is_nan() || end.is_nan() || start > end {
            return Err(StoreError::BadRange { start, end });
        }
        let series = self
            .series
            .read()
            .get(key)
            .cloned()
            .ok_or_else(|| StoreError::UnknownSeries(key.to_string()))?;
        let s = series.lock();
        let lo = s.points.partition_point(|p| p.t < start);
        let hi = s.points.partition_point(|p| p.t <= end);
        Ok(s.points[lo..hi.max(lo)].to_vec())
    }

    /// The whole series.
    pub fn get(&self, key: &SeriesKey) -> Result<Vec<Point>, StoreError> {
        self.query_range(key, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Samples in the half-open `[start, end)`, as the analyses slice traces.
    pub fn query_window(&self, key: &SeriesKey, start: f64, end: f64) -> Result<Vec<Point>, StoreError> {
        let all = self.query_range(key, start, end)?;
        Ok(slice_points(&all, start, end).to_vec())
    }

    pub fn keys(&self) -> Vec<SeriesKey> {
        self.series.read().keys().cloned().collect()
    }

    pub fn contains(&self, key: &SeriesKey) -> bool {
        self.series.read().contains_key(key)
    }

    pub fn len(&self, key: &SeriesKey) -> usize {
        self.series.read().get(key).map_or(0, |s| s.lock().points.len())
    }

    pub fn total_samples(&self) -> usize {
        self.series.read().values().map(|s| s.lock().points.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_samples() == 0
    }

    pub fn flush(&self) -> Result<(), StoreError> {
        for s in self.series.read().values() {
            s.lock().flush()?;
        }
        Ok(())
    }
}

impl Drop for SeriesStore {
    fn drop(&mut self) {
        if let Err(e) = self.flush() {
            log::error!("flushing series store: {e}");
        }
    }
}
