//! Metric names each plugin may publish.

use oda_core::telemetry::{Plugin, RailName};

/// The `stats_pub` catalog, grouped by type, in publication order.
pub const STATS_CATALOG: &[(&str, &[&str])] = &[
    ("Load", &["load_avg.1m", "load_avg.5m", "load_avg.15m"]),
    ("I/O", &["io_total.read", "io_total.writ"]),
    ("Processes", &["procs.run", "procs.blk", "procs.new"]),
    (
        "Memory",
        &["memory_usage.used", "memory_usage.free", "memory_usage.buff", "memory_usage.cach", "paging.in", "paging.out"],
    ),
    ("Disk", &["dsk_total.read", "dsk_total.writ"]),
    ("System", &["system.int", "system.csw"]),
    (
        "CPU",
        &[
            "total_cpu_usage.usr",
            "total_cpu_usage.sys",
            "total_cpu_usage.idl",
            "total_cpu_usage.wai",
            "total_cpu_usage.stl",
        ],
    ),
    ("Network", &["net_total.recv", "net_total.send"]),
    ("Temperatures", &["temperature.mb_temp", "temperature.cpu_temp", "temperature.nvme_temp"]),
];

/// Counters every `pmu_pub` sampler understands; others pass through by name.
pub const PMU_COUNTERS: [&str; 2] = ["cycle", "instret"];

/// Prefix of agent self-diagnostic metrics (published under `stats_pub`).
pub const DIAGNOSTIC_PREFIX: &str = "agent.";

pub fn stats_metrics() -> impl Iterator<Item = &'static str> {
    STATS_CATALOG.iter().flat_map(|(_, names)| names.iter().copied())
}

pub fn is_stats_metric(name: &str) -> bool {
    stats_metrics().any(|m| m == name)
}

fn is_counter_name(name: &str) -> bool {
    !name.is_empty()
        && name.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'.')
}

/// Whether `plugin` may publish `metric`.
pub fn is_known_metric(plugin: Plugin, metric: &str) -> bool {
    match plugin {
        Plugin::StatsPub => is_stats_metric(metric),
        Plugin::PowerPub => RailName::from_metric_name(metric).is_some(),
        Plugin::PmuPub => is_counter_name(metric),
    }
}

/// The full default metric list of a plugin.
pub fn default_metrics(plugin: Plugin) -> Vec<String> {
    match plugin {
        Plugin::StatsPub => stats_metrics().map(String::from).collect(),
        Plugin::PowerPub => RailName::ALL.iter().map(|r| r.metric_name()).collect(),
        Plugin::PmuPub => PMU_COUNTERS.iter().map(|s| s.to_string()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_28_names() {
        assert_eq!(stats_metrics().count(), 28);
        assert!(is_stats_metric("total_cpu_usage.stl"));
        assert!(!is_stats_metric("total_cpu_usage.steal"));
    }

    #[test]
    fn plugin_catalogs() {
        assert!(is_known_metric(Plugin::PowerPub, "power.ddr_vpp"));
        assert!(!is_known_metric(Plugin::PowerPub, "power.gpu"));
        assert!(is_known_metric(Plugin::PmuPub, "hpm3"));
        assert!(!is_known_metric(Plugin::PmuPub, "Cycle"));
        assert_eq!(default_metrics(Plugin::PowerPub).len(), 9);
    }
}
