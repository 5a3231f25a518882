//! Text and CSV renderings of power tables and decompositions.
//!
//! The multi-workload layout lists the nine rails in their canonical order,
//! then a `Total` row; each workload contributes an `[mW]` and a `[%]`
//! column with integers, optionally followed by boot `R1`/`R2` columns.

use std::fmt::Write;

use crate::analysis::{LeakageShare, PowerDecomposition, WorkloadPowerTable};
use crate::profiles::RailMeans;
use crate::telemetry::{RailName, Subsystem};

/// Boot region R1/R2 rail means shown after the workload columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BootColumns {
    pub r1: RailMeans,
    pub r2: RailMeans,
}

const LINE_W: usize = 10;
const NUM_W: usize = 6;

fn round(x: f64) -> i64 {
    x.round() as i64
}

/// Aligned multi-workload power table with integer mW and percent.
pub fn table5_text(tables: &[WorkloadPowerTable], boot: Option<&BootColumns>) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<LINE_W$}", "Line");
    for t in tables {
        let _ = write!(out, " {:>w$}", t.workload, w = 2 * NUM_W + 1);
    }
    if boot.is_some() {
        let _ = write!(out, " {:>w$}", "Boot", w = 2 * NUM_W + 1);
    }
    out.push('\n');
    let _ = write!(out, "{:<LINE_W$}", "");
    for _ in tables {
        let _ = write!(out, " {:>NUM_W$} {:>NUM_W$}", "[mW]", "[%]");
    }
    if boot.is_some() {
        let _ = write!(out, " {:>NUM_W$} {:>NUM_W$}", "R1", "R2");
    }
    out.push('\n');
    for rail in RailName::ALL {
        let _ = write!(out, "{:<LINE_W$}", rail.as_str());
        for t in tables {
            let _ = write!(out, " {:>NUM_W$} {:>NUM_W$}", t.display_mean(rail), t.display_percent(rail));
        }
        if let Some(b) = boot {
            let _ = write!(out, " {:>NUM_W$} {:>NUM_W$}", round(b.r1.get(rail)), round(b.r2.get(rail)));
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<LINE_W$}", "Total");
    for t in tables {
        let _ = write!(out, " {:>NUM_W$} {:>NUM_W$}", t.display_total(), 100);
    }
    if let Some(b) = boot {
        let _ = write!(out, " {:>NUM_W$} {:>NUM_W$}", round(b.r1.total()), round(b.r2.total()));
    }
    out.push('\n');
    out
}

/// Same content as [`table5_text`] as CSV, one row per rail plus `Total`.
pub fn table5_csv(tables: &[WorkloadPowerTable], boot: Option<&BootColumns>) -> String {
    let mut out = String::from("line");
    for t in tables {
        let _ = write!(out, ",{0} [mW],{0} [%]", t.workload);
    }
    if boot.is_some() {
        out.push_str(",Boot R1 [mW],Boot R2 [mW]");
    }
    out.push('\n');
    for rail in RailName::ALL {
        out.push_str(rail.as_str());
        for t in tables {
            let _ = write!(out, ",{},{}", t.display_mean(rail), t.display_percent(rail));
        }
        if let Some(b) = boot {
            let _ = write!(out, ",{},{}", round(b.r1.get(rail)), round(b.r2.get(rail)));
        }
        out.push('\n');
    }
    out.push_str("Total");
    for t in tables {
        let _ = write!(out, ",{},100", t.display_total());
    }
    if let Some(b) = boot {
        let _ = write!(out, ",{},{}", round(b.r1.total()), round(b.r2.total()));
    }
    out.push('\n');
    out
}

/// Single-workload table with one-decimal percentages and subsystem shares.
pub fn power_table_text(t: &WorkloadPowerTable) -> String {
    let mut out = format!("workload: {}\n", t.workload);
    let _ = writeln!(out, "{:<LINE_W$} {:>10} {:>7}", "rail", "mean [mW]", "[%]");
    for rail in RailName::ALL {
        let _ = writeln!(out, "{:<LINE_W$} {:>10.1} {:>7.1}", rail.as_str(), t.mean(rail), t.percent(rail));
    }
    let _ = writeln!(out, "{:<LINE_W$} {:>10.1} {:>7.1}", "Total", t.total, 100.0);
    out.push_str("subsystems:\n");
    for s in Subsystem::ALL {
        let _ = writeln!(out, "  {:<8} {:>7.1}%", s.as_str(), t.subsystem(s));
    }
    out
}

pub fn power_table_csv(t: &WorkloadPowerTable) -> String {
    let mut out = String::from("workload,line,mean_mw,percent\n");
    for rail in RailName::ALL {
        let _ = writeln!(out, "{},{},{:.3},{:.1}", t.workload, rail, t.mean(rail), t.percent(rail));
    }
    let _ = writeln!(out, "{},Total,{:.3},100.0", t.workload, t.total);
    for s in Subsystem::ALL {
        let _ = writeln!(out, "{},{},,{:.1}", t.workload, s, t.subsystem(s));
    }
    out
}

pub fn decomposition_text(d: &PowerDecomposition) -> String {
    let mut out = format!("rail: {}  idle: {:.0} mW\n", d.rail, d.reference_idle);
    let _ = writeln!(out, "{:<14} {:>9} {:>7}", "component", "[mW]", "[%]");
    for (name, mw, frac) in [
        ("leakage", d.leakage, d.leakage_fraction),
        ("dynamic+clock", d.dynamic_clock, d.dynamic_clock_fraction),
        ("os", d.os_power, d.os_fraction),
    ] {
        let _ = writeln!(out, "{name:<14} {mw:>9.1} {:>7.1}", frac * 100.0);
    }
    out
}

pub fn decomposition_csv(d: &PowerDecomposition) -> String {
    let mut out = String::from("rail,component,mw,percent\n");
    for (name, mw, frac) in [
        ("leakage", d.leakage, d.leakage_fraction),
        ("dynamic_clock", d.dynamic_clock, d.dynamic_clock_fraction),
        ("os", d.os_power, d.os_fraction),
    ] {
        let _ = writeln!(out, "{},{name},{mw:.3},{:.1}", d.rail, frac * 100.0);
    }
    out
}

pub fn leakage_text(s: &LeakageShare) -> String {
    format!(
        "rail: {}  leakage: {:.1} mW  idle: {:.1} mW  share: {:.1}%\n",
        s.rail,
        s.leakage,
        s.reference_idle,
        s.fraction * 100.0
    )
}
