//! Text / CSV / JSON renderings. Percentages carry one decimal.

use std::fmt::Write;

use oda_core::analysis::{BenchmarkRecord, Efficiency, ScalingSummary, ThermalEvent, WorkloadPowerTable};
use oda_core::report::{decomposition_csv, decomposition_text, leakage_text, BootColumns};
use oda_core::telemetry::{Point, RailName};
use serde_json::json;

use crate::analyze::BootReport;
use crate::cli::Format;

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

pub fn series_list(rows: &[(String, Option<u32>, String)], format: Format) -> String {
    match format {
        Format::Json => pretty(&json!(rows
            .iter()
            .map(|(n, c, m)| json!({ "node": n, "core": c, "metric": m }))
            .collect::<Vec<_>>())),
        Format::Csv => {
            let mut out = String::from("node,core,metric\n");
            for (n, c, m) in rows {
                let _ = writeln!(out, "{n},{},{m}", c.map(|c| c.to_string()).unwrap_or_default());
            }
            out
        }
        _ => {
            let mut out = String::new();
            for (n, c, m) in rows {
                match c {
                    Some(c) => {
                        let _ = writeln!(out, "{n}  core {c}  {m}");
                    }
                    None => {
                        let _ = writeln!(out, "{n}  {m}");
                    }
                }
            }
            out
        }
    }
}

pub fn points(pts: &[Point], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string(pts).expect("points serialize") + "\n",
        Format::Csv => {
            let mut out = String::from("timestamp,value\n");
            for p in pts {
                let _ = writeln!(out, "{:.6},{:.6}", p.t, p.v);
            }
            out
        }
        _ => {
            let mut out = String::new();
            for p in pts {
                let _ = writeln!(out, "{:.6}  {:.6}", p.t, p.v);
            }
            out
        }
    }
}

pub fn boot_report(r: &BootReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("boot report serializes") + "\n",
        Format::Csv => {
            let mut out = String::new();
            for (i, d) in r.decompositions.iter().enumerate() {
                let csv = decomposition_csv(d);
                // Keep a single header.
                out.push_str(if i == 0 { &csv } else { csv.split_once('\n').map_or("", |x| x.1) });
            }
            if out.is_empty() {
                out.push_str("rail,component,mw,percent\n");
            }
            for s in &r.leakage {
                let _ = writeln!(out, "{},leakage_share,{:.3},{:.1}", s.rail, s.leakage, s.fraction * 100.0);
            }
            out
        }
        _ => {
            let seg = &r.segmentation;
            let mut out = String::from("regions [s]:\n");
            for (name, (a, b)) in [("R1", seg.r1), ("R2", seg.r2), ("R3", seg.r3)] {
                let _ = writeln!(out, "  {name}  {a:.3} .. {b:.3}");
            }
            for d in &r.decompositions {
                out.push_str(&decomposition_text(d));
            }
            for s in &r.leakage {
                out.push_str(&leakage_text(s));
            }
            out
        }
    }
}

pub fn efficiency(rows: &[(BenchmarkRecord, Efficiency)], format: Format) -> String {
    match format {
        Format::Json => pretty(&json!(rows
            .iter()
            .map(|(r, e)| json!({
                "name": r.name,
                "sustained": r.sustained,
                "nodes_used": r.nodes_used,
                "fraction": e.fraction,
                "percent": e.percent(),
                "suspect_peak_model": e.suspect_peak_model,
            }))
            .collect::<Vec<_>>())),
        Format::Csv => {
            let mut out = String::from("name,sustained,nodes_used,percent\n");
            for (r, e) in rows {
                let _ = writeln!(out, "{},{},{},{:.1}", r.name, r.sustained.value(), r.nodes_used, e.percent());
            }
            out
        }
        _ => {
            let mut out = String::new();
            for (r, e) in rows {
                let flag = if e.suspect_peak_model { "  (exceeds peak: check the peak model)" } else { "" };
                let _ = writeln!(out, "{}: {:.1}%{flag}", r.name, e.percent());
            }
            out
        }
    }
}

pub fn scaling(s: &ScalingSummary, format: Format) -> String {
    match format {
        Format::Json => pretty(&json!({
            "nodes": s.nodes,
            "speedup": s.speedup,
            "linear_fraction": s.linear_fraction,
            "percent": s.linear_fraction * 100.0,
        })),
        Format::Csv => format!("nodes,speedup,linear_percent\n{},{:.3},{:.1}\n", s.nodes, s.speedup, s.linear_fraction * 100.0),
        _ => format!(
            "nodes: {}\nspeedup: {:.3}\nlinear fraction: {:.1}%\n",
            s.nodes,
            s.speedup,
            s.linear_fraction * 100.0
        ),
    }
}

pub fn thermal(events: &[ThermalEvent], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(events).expect("events serialize") + "\n",
        Format::Csv => {
            let mut out = String::from("node,sensor,kind,onset,peak\n");
            for e in events {
                let _ = writeln!(out, "{},{},{},{:.6},{:.3}", e.node, e.sensor, e.kind, e.onset, e.peak);
            }
            out
        }
        _ => {
            if events.is_empty() {
                return "no events\n".into();
            }
            let mut out = String::new();
            for e in events {
                let _ = writeln!(out, "{:<8} {} {} onset {:.3} peak {:.1} °C", e.kind, e.node, e.sensor, e.onset, e.peak);
            }
            out
        }
    }
}

pub fn table5_json(tables: &[WorkloadPowerTable], boot: Option<&BootColumns>) -> String {
    let cols: Vec<_> = tables
        .iter()
        .map(|t| {
            json!({
                "workload": t.workload,
                "rails": RailName::ALL.iter().map(|&r| json!({
                    "rail": r,
                    "mean_mw": t.mean(r),
                    "percent": t.percent(r),
                })).collect::<Vec<_>>(),
                "total_mw": t.total,
            })
        })
        .collect();
    let boot = boot.map(|b| json!({ "r1": b.r1, "r2": b.r2 }));
    pretty(&json!({ "workloads": cols, "boot": boot }))
}
