//! procfs / sysfs / hwmon readers, following dstat's definitions.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use oda_core::telemetry::{RailName, SensorMap};

use super::{read_millidegrees, rooted, Source, SourceError};
use crate::config::RailChannel;

pub struct FilesystemSource {
    root: PathBuf,
    sensors: SensorMap,
    rails: BTreeMap<RailName, RailChannel>,
    /// Previous cumulative reading per rate metric.
    prev: HashMap<String, (f64, f64)>,
    /// Previous (part, total) jiffies per CPU share metric.
    prev_cpu: HashMap<String, (f64, f64)>,
    page_size: f64,
}

impl FilesystemSource {
    pub fn new(root: PathBuf, sensors: SensorMap, rails: BTreeMap<RailName, RailChannel>) -> Self {
        // SAFETY: sysconf has no preconditions.
        let page = unsafe { libc::sysconf(libc::_SC_PAGESIZE) };
        FilesystemSource {
            root,
            sensors,
            rails,
            prev: HashMap::new(),
            prev_cpu: HashMap::new(),
            page_size: if page > 0 { page as f64 } else { 4096.0 },
        }
    }

    fn path(&self, p: &str) -> PathBuf {
        rooted(&self.root, Path::new(p))
    }

    fn text(&self, name: &str, p: &str) -> Result<(PathBuf, String), SourceError> {
        let path = self.path(p);
        match std::fs::read_to_string(&path) {
            Ok(t) => Ok((path, t)),
            Err(source) => Err(SourceError::Missing { name: name.to_string(), path, source }),
        }
    }

    fn rate(&mut self, metric: &str, now: f64, cumulative: f64) -> Result<f64, SourceError> {
        let prev = self.prev.insert(metric.to_string(), (now, cumulative));
        match prev {
            Some((t0, c0)) if now > t0 && cumulative >= c0 => Ok((cumulative - c0) / (now - t0)),
            _ => Err(SourceError::Warmup(metric.to_string())),
        }
    }

    fn share(&mut self, metric: &str, part: f64, total: f64) -> Result<f64, SourceError> {
        let prev = self.prev_cpu.insert(metric.to_string(), (part, total));
        match prev {
            Some((p0, t0)) if total > t0 => Ok(100.0 * (part - p0).max(0.0) / (total - t0)),
            _ => Err(SourceError::Warmup(metric.to_string())),
        }
    }

    fn stat_field(&self, metric: &str, key: &str) -> Result<f64, SourceError> {
        let (path, text) = self.text(metric, "/proc/stat")?;
        text.lines()
            .find_map(|l| l.strip_prefix(key).filter(|r| r.starts_with(' ')))
            .and_then(|rest| rest.split_whitespace().next())
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| SourceError::Parse { name: metric.into(), path })
    }

    fn meminfo(&self, metric: &str) -> Result<HashMap<String, f64>, SourceError> {
        let (_, text) = self.text(metric, "/proc/meminfo")?;
        Ok(text
            .lines()
            .filter_map(|l| {
                let (k, v) = l.split_once(':')?;
                let kb: f64 = v.split_whitespace().next()?.parse().ok()?;
                Some((k.to_string(), kb * 1024.0))
            })
            .collect())
    }

    fn memory(&self, metric: &str, which: &str) -> Result<f64, SourceError> {
        let m = self.meminfo(metric)?;
        let get = |k: &str| m.get(k).copied().unwrap_or(0.0);
        let parse_err = || SourceError::Parse { name: metric.into(), path: self.path("/proc/meminfo") };
        if !m.contains_key("MemTotal") {
            return Err(parse_err());
        }
        let free = get("MemFree");
        let buff = get("Buffers");
        let cach = get("Cached") + get("SReclaimable") - get("Shmem");
        Ok(match which {
            "used" => get("MemTotal") - free - buff - cach,
            "free" => free,
            "buff" => buff,
            "cach" => cach,
            _ => return Err(SourceError::Unsupported(metric.into())),
        })
    }

    fn vmstat(&self, metric: &str, key: &str) -> Result<f64, SourceError> {
        let (path, text) = self.text(metric, "/proc/vmstat")?;
        text.lines()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| SourceError::Parse { name: metric.into(), path })
    }

    /// Sums one diskstats column over whole disks.
    fn diskstats(&self, metric: &str, column: usize) -> Result<f64, SourceError> {
        let (path, text) = self.text(metric, "/proc/diskstats")?;
        let block = self.path("/sys/block");
        let check_block = block.is_dir();
        let mut sum = 0.0;
        for line in text.lines() {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() <= column {
                continue;
            }
            let dev = f[2];
            if dev.starts_with("loop") || dev.starts_with("ram") || dev.starts_with("dm-") {
                continue;
            }
            if check_block && !block.join(dev).exists() {
                continue;
            }
            sum += f[column].parse::<f64>().map_err(|_| SourceError::Parse { name: metric.into(), path: path.clone() })?;
        }
        Ok(sum)
    }

    fn net(&self, metric: &str, column: usize) -> Result<f64, SourceError> {
        let (path, text) = self.text(metric, "/proc/net/dev")?;
        let mut sum = 0.0;
        for line in text.lines().skip(2) {
            let Some((iface, rest)) = line.split_once(':') else { continue };
            if iface.trim() == "lo" {
                continue;
            }
            let v = rest
                .split_whitespace()
                .nth(column)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| SourceError::Parse { name: metric.into(), path: path.clone() })?;
            sum += v;
        }
        Ok(sum)
    }

    fn cpu(&mut self, metric: &str, which: &str) -> Result<f64, SourceError> {
        let (path, text) = self.text(metric, "/proc/stat")?;
        let j: Vec<f64> = text
            .lines()
            .find_map(|l| l.strip_prefix("cpu "))
            .map(|r| r.split_whitespace().filter_map(|v| v.parse().ok()).collect())
            .unwrap_or_default();
        if j.len() < 8 {
            return Err(SourceError::Parse { name: metric.into(), path });
        }
        // user nice system idle iowait irq softirq steal
        let part = match which {
            "usr" => j[0] + j[1],
            "sys" => j[2] + j[5] + j[6],
            "idl" => j[3],
            "wai" => j[4],
            "stl" => j[7],
            _ => return Err(SourceError::Unsupported(metric.into())),
        };
        let total: f64 = j[..8].iter().sum();
        self.share(metric, part, total)
    }

    fn loadavg(&self, metric: &str, idx: usize) -> Result<f64, SourceError> {
        let (path, text) = self.text(metric, "/proc/loadavg")?;
        text.split_whitespace()
            .nth(idx)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| SourceError::Parse { name: metric.into(), path })
    }

    fn stats(&mut self, metric: &str, now: f64) -> Result<f64, SourceError> {
        let (group, field) = metric.split_once('.').ok_or_else(|| SourceError::Unsupported(metric.into()))?;
        match (group, field) {
            ("load_avg", "1m") => self.loadavg(metric, 0),
            ("load_avg", "5m") => self.loadavg(metric, 1),
            ("load_avg", "15m") => self.loadavg(metric, 2),
            ("procs", "run") => self.stat_field(metric, "procs_running"),
            ("procs", "blk") => self.stat_field(metric, "procs_blocked"),
            ("procs", "new") => {
                let c = self.stat_field(metric, "processes")?;
                self.rate(metric, now, c)
            }
            ("memory_usage", w) => self.memory(metric, w),
            ("paging", "in") | ("paging", "out") => {
                let key = if field == "in" { "pswpin" } else { "pswpout" };
                let c = self.vmstat(metric, key)? * self.page_size;
                self.rate(metric, now, c)
            }
            ("io_total", "read") | ("io_total", "writ") | ("dsk_total", "read") | ("dsk_total", "writ") => {
                // diskstats: 3 reads completed, 5 sectors read, 7 writes completed, 9 sectors written.
                let (column, scale) = match (group, field) {
                    ("io_total", "read") => (3, 1.0),
                    ("io_total", _) => (7, 1.0),
                    (_, "read") => (5, 512.0),
                    _ => (9, 512.0),
                };
                let c = self.diskstats(metric, column)? * scale;
                self.rate(metric, now, c)
            }
            ("system", "int") => {
                let c = self.stat_field(metric, "intr")?;
                self.rate(metric, now, c)
            }
            ("system", "csw") => {
                let c = self.stat_field(metric, "ctxt")?;
                self.rate(metric, now, c)
            }
            ("total_cpu_usage", w) => self.cpu(metric, w),
            ("net_total", "recv") | ("net_total", "send") => {
                let c = self.net(metric, if field == "recv" { 0 } else { 8 })?;
                self.rate(metric, now, c)
            }
            ("temperature", sensor) => {
                let path = self.sensors.get(sensor).ok_or_else(|| SourceError::Unsupported(metric.into()))?;
                read_millidegrees(sensor, &rooted(&self.root, path))
            }
            _ => Err(SourceError::Unsupported(metric.into())),
        }
    }

    fn power(&self, metric: &str) -> Result<f64, SourceError> {
        let rail = RailName::from_metric_name(metric).ok_or_else(|| SourceError::Unsupported(metric.into()))?;
        let channel = self.rails.get(&rail).ok_or_else(|| SourceError::Unsupported(metric.into()))?;
        let (path, scale) = match channel {
            RailChannel::Power { path } => (path, 1.0),
            RailChannel::Shunt { path, shunt_ohms, rail_volts } => (path, rail_volts / shunt_ohms),
        };
        let path = rooted(&self.root, path);
        let text = std::fs::read_to_string(&path).map_err(|source| SourceError::Missing {
            name: metric.into(),
            path: path.clone(),
            source,
        })?;
        let raw: f64 = text.trim().parse().map_err(|_| SourceError::Parse { name: metric.into(), path })?;
        Ok(raw * scale)
    }
}

impl Source for FilesystemSource {
    fn read(&mut self, metric: &str, _core: Option<u32>, now: f64) -> Result<f64, SourceError> {
        if metric.starts_with("power.") {
            self.power(metric)
        } else {
            self.stats(metric, now)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn fake_root() -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        let p = d.path();
        fs::create_dir_all(p.join("proc/net")).unwrap();
        fs::create_dir_all(p.join("sys/block/nvme0n1")).unwrap();
        fs::write(p.join("proc/loadavg"), "0.52 0.41 0.30 2/180 4242\n").unwrap();
        fs::write(
            p.join("proc/stat"),
            "cpu  100 0 50 800 10 0 0 0 0 0\ncpu0 25 0 12 200 2 0 0 0 0 0\nintr 5000 1 2 3\nctxt 9000\nprocesses 300\nprocs_running 2\nprocs_blocked 1\n",
        )
        .unwrap();
        fs::write(
            p.join("proc/meminfo"),
            "MemTotal:       16000000 kB\nMemFree:        12000000 kB\nBuffers:          100000 kB\nCached:          2000000 kB\nShmem:             50000 kB\nSReclaimable:     150000 kB\n",
        )
        .unwrap();
        fs::write(p.join("proc/vmstat"), "pgpgin 10\npswpin 4\npswpout 8\n").unwrap();
        fs::write(
            p.join("proc/diskstats"),
            " 259 0 nvme0n1 100 0 2000 0 50 0 4000 0 0 0 0\n 259 1 nvme0n1p1 90 0 1800 0 40 0 3000 0 0 0 0\n 7 0 loop0 1 0 2 0 0 0 0 0 0 0 0\n",
        )
        .unwrap();
        fs::write(
            p.join("proc/net/dev"),
            "Inter-|   Receive\n face |bytes\n    lo: 999 0 0 0 0 0 0 0 999 0 0 0 0 0 0 0\n  eth0: 1000 5 0 0 0 0 0 0 2000 7 0 0 0 0 0 0\n",
        )
        .unwrap();
        d
    }

    fn src(root: &Path) -> FilesystemSource {
        let mut rails = BTreeMap::new();
        rails.insert(RailName::Core, RailChannel::Power { path: "/sys/bus/power/core".into() });
        rails.insert(RailName::DdrMem, RailChannel::Shunt { path: "/sys/bus/power/ddr_mem".into(), shunt_ohms: 0.01, rail_volts: 1.1 });
        FilesystemSource::new(root.to_path_buf(), SensorMap::board_default(), rails)
    }

    #[test]
    fn gauges() {
        let d = fake_root();
        let mut s = src(d.path());
        assert_eq!(s.read("load_avg.5m", None, 1.0).unwrap(), 0.41);
        assert_eq!(s.read("procs.run", None, 1.0).unwrap(), 2.0);
        assert_eq!(s.read("procs.blk", None, 1.0).unwrap(), 1.0);
        assert_eq!(s.read("memory_usage.free", None, 1.0).unwrap(), 12_000_000.0 * 1024.0);
        assert_eq!(s.read("memory_usage.cach", None, 1.0).unwrap(), 2_100_000.0 * 1024.0);
        assert_eq!(s.read("memory_usage.used", None, 1.0).unwrap(), 1_800_000.0 * 1024.0);
    }

    #[test]
    fn rates_need_two_readings() {
        let d = fake_root();
        let mut s = src(d.path());
        assert!(matches!(s.read("system.csw", None, 10.0), Err(SourceError::Warmup(_))));
        assert!(matches!(s.read("dsk_total.read", None, 10.0), Err(SourceError::Warmup(_))));
        assert!(matches!(s.read("net_total.send", None, 10.0), Err(SourceError::Warmup(_))));
        assert!(matches!(s.read("total_cpu_usage.idl", None, 10.0), Err(SourceError::Warmup(_))));
        assert!(matches!(s.read("total_cpu_usage.stl", None, 10.0), Err(SourceError::Warmup(_))));
        let p = d.path();
        fs::write(
            p.join("proc/stat"),
            "cpu  110 0 60 870 10 0 0 10 0 0\nintr 5500 1\nctxt 9500\nprocesses 310\nprocs_running 1\nprocs_blocked 0\n",
        )
        .unwrap();
        fs::write(
            p.join("proc/diskstats"),
            " 259 0 nvme0n1 100 0 3024 0 50 0 4000 0 0 0 0\n 259 1 nvme0n1p1 90 0 9999 0 40 0 3000 0 0 0 0\n",
        )
        .unwrap();
        fs::write(
            p.join("proc/net/dev"),
            "h\nh\n    lo: 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0\n  eth0: 1000 5 0 0 0 0 0 0 2500 7 0 0 0 0 0 0\n",
        )
        .unwrap();
        assert_eq!(s.read("system.csw", None, 15.0).unwrap(), 100.0);
        // Partitions are excluded: only nvme0n1 counts.
        assert_eq!(s.read("dsk_total.read", None, 15.0).unwrap(), 1024.0 * 512.0 / 5.0);
        assert_eq!(s.read("net_total.send", None, 15.0).unwrap(), 100.0);
        assert_eq!(s.read("total_cpu_usage.idl", None, 15.0).unwrap(), 70.0);
        assert_eq!(s.read("total_cpu_usage.stl", None, 15.0).unwrap(), 10.0);
    }

    #[test]
    fn rails_and_temperatures() {
        let d = fake_root();
        let p = d.path();
        fs::create_dir_all(p.join("sys/bus/power")).unwrap();
        fs::write(p.join("sys/bus/power/core"), "3075\n").unwrap();
        fs::write(p.join("sys/bus/power/ddr_mem"), "3.672727\n").unwrap();
        fs::create_dir_all(p.join("sys/class/hwmon/hwmon1")).unwrap();
        fs::write(p.join("sys/class/hwmon/hwmon1/temp2_input"), "71000\n").unwrap();
        let mut s = src(p);
        assert_eq!(s.read("power.core", None, 0.0).unwrap(), 3075.0);
        assert!((s.read("power.ddr_mem", None, 0.0).unwrap() - 404.0).abs() < 1e-3);
        assert!(matches!(s.read("power.pll", None, 0.0), Err(SourceError::Unsupported(_))));
        assert_eq!(s.read("temperature.cpu_temp", None, 0.0).unwrap(), 71.0);
        assert!(matches!(s.read("temperature.nvme_temp", None, 0.0), Err(SourceError::Missing { .. })));
    }
}
