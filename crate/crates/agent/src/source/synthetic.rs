use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use oda_core::profiles::RailMeans;
use oda_core::telemetry::{Plugin, RailName};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Source, SourceError};
use crate::config::SyntheticSource;

/// Resting levels of an idle node for stats metrics without a configured mean.
fn idle_stats_level(metric: &str) -> f64 {
    match metric {
        "load_avg.1m" => 0.08,
        "load_avg.5m" => 0.05,
        "load_avg.15m" => 0.02,
        "io_total.read" => 0.2,
        "io_total.writ" => 1.5,
        "procs.run" => 1.0,
        "procs.new" => 0.4,
        "memory_usage.used" => 5.2e8,
        "memory_usage.free" => 1.4e10,
        "memory_usage.buff" => 3.0e7,
        "memory_usage.cach" => 1.5e9,
        "dsk_total.writ" => 2.4e4,
        "system.int" => 260.0,
        "system.csw" => 420.0,
        "total_cpu_usage.usr" => 0.3,
        "total_cpu_usage.sys" => 0.4,
        "total_cpu_usage.idl" => 99.2,
        "total_cpu_usage.wai" => 0.1,
        "net_total.recv" => 900.0,
        "net_total.send" => 600.0,
        "temperature.mb_temp" => 35.0,
        "temperature.cpu_temp" => 39.0,
        "temperature.nvme_temp" => 38.0,
        _ => 0.0,
    }
}

struct Replay {
    /// Offsets from the first sample, ascending.
    points: Vec<(f64, f64)>,
    span: f64,
}

impl Replay {
    fn load(metric: &str, path: &Path) -> Result<Self, SourceError> {
        let bad = |why: String| SourceError::Replay(format!("{metric}: {}: {why}", path.display()));
        let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
        let mut points = Vec::new();
        for rec in rdr.deserialize::<(f64, f64)>() {
            points.push(rec.map_err(|e| bad(e.to_string()))?);
        }
        let Some(&(t0, _)) = points.first() else {
            return Err(bad("no samples".into()));
        };
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(bad("timestamps not increasing".into()));
        }
        for p in &mut points {
            p.0 -= t0;
        }
        let last = points.last().unwrap().0;
        // One typical step past the end before looping.
        let step = if points.len() > 1 { last / (points.len() - 1) as f64 } else { 1.0 };
        Ok(Replay { points, span: last + step })
    }

    fn at(&self, offset: f64) -> f64 {
        let o = offset.rem_euclid(self.span);
        let i = self.points.partition_point(|p| p.0 <= o);
        self.points[i.saturating_sub(1)].1
    }
}

/// Generated readings for desk runs.
pub struct SyntheticGenerator {
    config: SyntheticSource,
    rails: RailMeans,
    rng: ChaCha8Rng,
    replays: BTreeMap<String, Replay>,
    start: Option<f64>,
    counter_origin: HashMap<(u32, String), f64>,
}

impl SyntheticGenerator {
    pub fn new(config: &SyntheticSource, plugin: Plugin, salt: &str) -> Result<Self, SourceError> {
        let mut replays = BTreeMap::new();
        for (metric, path) in &config.replay {
            replays.insert(metric.clone(), Replay::load(metric, path)?);
        }
        // FNV-1a over plugin and salt, mixed into the seed.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in plugin.as_str().bytes().chain(salt.bytes()) {
            h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
        }
        Ok(SyntheticGenerator {
            config: config.clone(),
            rails: config.workload.reference_means(),
            rng: ChaCha8Rng::seed_from_u64(config.seed ^ h),
            replays,
            start: None,
            counter_origin: HashMap::new(),
        })
    }

    fn noisy(&mut self, mean: f64) -> f64 {
        if self.config.noise == 0.0 {
            return mean;
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        (mean * (1.0 + self.config.noise * z)).max(0.0)
    }
}

impl Source for SyntheticGenerator {
    fn read(&mut self, metric: &str, core: Option<u32>, now: f64) -> Result<f64, SourceError> {
        let start = *self.start.get_or_insert(now);
        if let Some(c) = self.config.constant {
            return Ok(c);
        }
        if let Some(r) = self.replays.get(metric) {
            return Ok(r.at(now - start));
        }
        if let Some(rail) = RailName::from_metric_name(metric) {
            let mean = self.rails.get(rail);
            return Ok(self.noisy(mean));
        }
        if let Some(core) = core {
            let rate = *self.config.counter_rates.get(metric).ok_or_else(|| SourceError::Unsupported(metric.into()))?;
            let origin = *self.counter_origin.entry((core, metric.to_string())).or_insert(now);
            return Ok((rate * (now - origin).max(0.0)).floor());
        }
        let mean = self.config.stats.get(metric).copied().unwrap_or_else(|| idle_stats_level(metric));
        Ok(self.noisy(mean))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use oda_core::profiles::Workload;

    #[test]
    fn idle_rail_means() {
        let cfg = SyntheticSource { seed: 5, ..Default::default() };
        let mut g = SyntheticGenerator::new(&cfg, Plugin::PowerPub, "mc01").unwrap();
        let n = 60_000;
        let core: f64 = (0..n).map(|i| g.read("power.core", None, i as f64 * 1e-3).unwrap()).sum::<f64>() / n as f64;
        let pll: f64 = (0..n).map(|i| g.read("power.pll", None, i as f64 * 1e-3).unwrap()).sum::<f64>() / n as f64;
        assert!((core / 3075.0 - 1.0).abs() < 0.01, "{core}");
        assert!((pll - 1.0).abs() < 0.01, "{pll}");
    }

    #[test]
    fn constant_and_zero_noise() {
        let cfg = SyntheticSource { constant: Some(7.0), ..Default::default() };
        let mut g = SyntheticGenerator::new(&cfg, Plugin::StatsPub, "n").unwrap();
        assert_eq!(g.read("load_avg.1m", None, 1.0).unwrap(), 7.0);
        let cfg = SyntheticSource { workload: Workload::Qe, noise: 0.0, ..Default::default() };
        let mut g = SyntheticGenerator::new(&cfg, Plugin::PowerPub, "n").unwrap();
        assert_eq!(g.read("power.ddr_mem", None, 1.0).unwrap(), 434.0);
    }

    #[test]
    fn counters_grow_with_rate() {
        let mut g = SyntheticGenerator::new(&SyntheticSource::default(), Plugin::PmuPub, "n").unwrap();
        assert_eq!(g.read("cycle", Some(1), 100.0).unwrap(), 0.0);
        assert_eq!(g.read("cycle", Some(1), 100.5).unwrap(), 0.5e9);
        assert!(matches!(g.read("hpm4", Some(1), 101.0), Err(SourceError::Unsupported(_))));
    }

    #[test]
    fn replay_loops() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cpu_temp.csv");
        std::fs::write(&p, "timestamp,value\n100,71\n101,72\n102,73\n").unwrap();
        let cfg = SyntheticSource { replay: BTreeMap::from([("temperature.cpu_temp".into(), p)]), ..Default::default() };
        let mut g = SyntheticGenerator::new(&cfg, Plugin::StatsPub, "n").unwrap();
        let got: Vec<f64> = [0.0, 1.5, 2.0, 3.0, 4.2].iter().map(|o| g.read("temperature.cpu_temp", None, 50.0 + o).unwrap()).collect();
        assert_eq!(got, vec![71.0, 72.0, 73.0, 71.0, 72.0]);
    }
}
