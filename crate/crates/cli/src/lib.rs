//! The `oda` command. Every analysis subcommand is a thin wrapper over one
//! function of `oda_core::analysis`; see [`analyze`] for the data plumbing.

pub mod analyze;
pub mod cli;
pub mod data;
pub mod error;
pub mod render;
pub mod service;

use std::fs;
use std::path::Path;

use oda_core::analysis::{
    bandwidth_efficiency, flops_efficiency, parse_hpl_output, parse_stream_output, scaling_summary, window_points,
    BenchmarkRecord, MachineSpec, ThermalThresholds, Throughput,
};
use oda_core::plot::LineChart;
use oda_core::telemetry::{slice_points, RailName};
use oda_sim::{generate, write_bundle, ProfileName, SimScenario};

use crate::analyze::{find_phase, origin, phase_spans};
use crate::cli::*;
use crate::data::{span_from, Dataset, Span};
pub use crate::error::CliError;

/// Runs one parsed command line and returns what goes to stdout.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Agent(AgentCmd::Run(a)) => print(&service::agent_run(a)?, None),
        Command::Serve(a) => print(&service::serve(a)?, None),
        Command::Sim(SimCmd::Generate(a)) => print(&sim_generate(a)?, None),
        Command::Sim(SimCmd::Replay(a)) => print(&service::sim_replay(a)?, None),
        Command::Query(a) => print(&query(a)?, a.out.output.as_deref()),
        Command::Analyze(AnalyzeCmd::PowerTable(a)) => print(&power_table(a)?, a.out.output.as_deref()),
        Command::Analyze(AnalyzeCmd::BootDecompose(a)) => print(&boot_decompose(a)?, a.out.output.as_deref()),
        Command::Analyze(AnalyzeCmd::Efficiency(a)) => print(&efficiency(a)?, a.out.output.as_deref()),
        Command::Analyze(AnalyzeCmd::Scaling(a)) => print(&scaling(a)?, a.out.output.as_deref()),
        Command::Analyze(AnalyzeCmd::Thermal(a)) => print(&thermal(a)?, a.out.output.as_deref()),
        Command::Report(ReportCmd::Table5(a)) => print(&table5(a)?, a.out.output.as_deref()),
        Command::Plot(a) => plot(a),
    }
}

fn print(text: &str, to: Option<&Path>) -> Result<(), CliError> {
    match to {
        Some(path) => fs::write(path, text).map_err(|e| CliError::config(format!("writing {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn reject(format: Format, allowed: &[Format]) -> Result<(), CliError> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(CliError::config(format!("--format {format:?} is not supported here").to_lowercase()))
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output types serialize") + "\n"
}

pub fn sim_generate(a: &SimGenerateArgs) -> Result<String, CliError> {
    let text = fs::read_to_string(&a.scenario)
        .map_err(|e| CliError::config(format!("reading {}: {e}", a.scenario.display())))?;
    let scenario = SimScenario::from_toml(&text)?;
    let bundle = generate(&scenario)?;
    write_bundle(&bundle, &a.out).map_err(|e| CliError::config(format!("writing bundle: {e}")))?;
    Ok(format!(
        "wrote {} nodes, {} series, {} samples to {}\n",
        bundle.nodes.len(),
        bundle.nodes.iter().map(|n| n.signals.len()).sum::<usize>(),
        bundle.total_samples(),
        a.out.display()
    ))
}

pub fn query(a: &QueryArgs) -> Result<String, CliError> {
    reject(a.out.format, &[Format::Text, Format::Csv, Format::Json])?;
    let ds = Dataset::open(&a.source)?;
    let Some(metric) = &a.metric else {
        let mut rows = Vec::new();
        let nodes = match &a.source.node {
            Some(n) => vec![ds.pick_node(Some(n))?],
            None => ds.nodes(),
        };
        for node in nodes {
            for (core, metric) in ds.metrics(&node) {
                rows.push((node.clone(), core, metric));
            }
        }
        return Ok(render::series_list(&rows, a.out.format));
    };
    let node = ds.pick_node(a.source.node.as_deref())?;
    let pts = ds.series(&node, metric, a.core)?;
    let (start, end) = (a.start.unwrap_or(f64::NEG_INFINITY), a.end.unwrap_or(f64::INFINITY));
    if start > end {
        return Err(CliError::config(format!("bad range [{start}, {end}]")));
    }
    let sel: Vec<_> = pts.iter().copied().filter(|p| p.t >= start && p.t <= end).collect();
    Ok(render::points(&sel, a.out.format))
}

fn window(ds: &Dataset, node: &str, w: &WindowArgs) -> Result<Span, CliError> {
    if w.from.is_none() && w.to.is_none() {
        return Ok(Span::ALL);
    }
    span_from(origin(ds, node)?, w.from, w.to)
}

pub fn power_table(a: &PowerTableArgs) -> Result<String, CliError> {
    reject(a.out.format, &[Format::Text, Format::Csv, Format::Json])?;
    let ds = Dataset::open(&a.source)?;
    let node = ds.pick_node(a.source.node.as_deref())?;
    let (label, span) = match &a.workload {
        Some(w) => {
            let name: ProfileName = w.parse().map_err(CliError::config)?;
            (name.to_string(), find_phase(&ds, &node, name)?)
        }
        None => (a.label.clone(), window(&ds, &node, &a.window)?),
    };
    let t = analyze::power_table(&ds, &node, &label, span)?;
    Ok(match a.out.format {
        Format::Csv => oda_core::report::power_table_csv(&t),
        Format::Json => json(&t),
        _ => oda_core::report::power_table_text(&t),
    })
}

fn boot_span(ds: &Dataset, node: &str, w: &WindowArgs) -> Result<Span, CliError> {
    if w.from.is_some() || w.to.is_some() {
        return window(ds, node, w);
    }
    if phase_spans(ds, node).is_empty() {
        return Ok(Span::ALL);
    }
    find_phase(ds, node, ProfileName::Boot)
}

pub fn boot_decompose(a: &BootDecomposeArgs) -> Result<String, CliError> {
    reject(a.out.format, &[Format::Text, Format::Csv, Format::Json])?;
    let ds = Dataset::open(&a.source)?;
    let node = ds.pick_node(a.source.node.as_deref())?;
    let span = boot_span(&ds, &node, &a.window)?;
    let report = analyze::boot_decompose(&ds, &node, span, &a.rails, &a.leakage_rails, a.idle)?;
    Ok(render::boot_report(&report, a.out.format))
}

pub fn efficiency(a: &EfficiencyArgs) -> Result<String, CliError> {
    reject(a.out.format, &[Format::Text, Format::Csv, Format::Json])?;
    let spec = MachineSpec::new(a.cores, a.peak_per_core, a.nodes.max(1), a.peak_bw)?;
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| CliError::missing(format!("reading {}: {e}", p.display())));
    let records: Vec<BenchmarkRecord> = if let Some(f) = a.sustained {
        vec![BenchmarkRecord::flops("sustained", f, a.nodes)?]
    } else if let Some(b) = a.bandwidth {
        vec![BenchmarkRecord::new("bandwidth", Throughput::BytesPerSec(b), 1)?]
    } else if let Some(p) = &a.hpl {
        parse_hpl_output(&read(p)?, a.nodes).map_err(|e| CliError::missing(e.to_string()))?
    } else if let Some(p) = &a.stream {
        parse_stream_output(&read(p)?).map_err(|e| CliError::missing(e.to_string()))?
    } else {
        return Err(CliError::config("one of --sustained, --bandwidth, --hpl or --stream is required"));
    };
    let mut rows = Vec::new();
    for rec in &records {
        let eff = match rec.sustained {
            Throughput::FlopsPerSec(_) => flops_efficiency(rec, &spec)?,
            Throughput::BytesPerSec(_) => bandwidth_efficiency(rec, &spec)?,
        };
        rows.push((rec.clone(), eff));
    }
    Ok(render::efficiency(&rows, a.out.format))
}

pub fn scaling(a: &ScalingArgs) -> Result<String, CliError> {
    reject(a.out.format, &[Format::Text, Format::Csv, Format::Json])?;
    let single = BenchmarkRecord::flops("single", a.single, 1)?;
    let multi = BenchmarkRecord::flops("multi", a.multi, a.nodes)?;
    let s = scaling_summary(&single, &multi)?;
    Ok(render::scaling(&s, a.out.format))
}

pub fn thermal(a: &ThermalArgs) -> Result<String, CliError> {
    reject(a.out.format, &[Format::Text, Format::Csv, Format::Json])?;
    let ds = Dataset::open(&a.source)?;
    let nodes = match &a.source.node {
        Some(n) => vec![ds.pick_node(Some(n))?],
        None => ds.nodes(),
    };
    let th = ThermalThresholds {
        warn: a.warn,
        critical: a.critical,
        runaway_rate: a.runaway_rate,
        runaway_window: a.runaway_window,
    };
    th.validate()?;
    let events = analyze::thermal(&ds, &nodes, &th)?;
    Ok(render::thermal(&events, a.out.format))
}

pub fn table5(a: &Table5Args) -> Result<String, CliError> {
    reject(a.out.format, &[Format::Text, Format::Csv, Format::Json])?;
    let ds = Dataset::open(&a.source)?;
    let node = ds.pick_node(a.source.node.as_deref())?;
    let explicit = if a.phases.is_empty() {
        Vec::new()
    } else {
        let o = origin(&ds, &node)?;
        a.phases
            .iter()
            .map(|(name, (f, t))| Ok((name.clone(), span_from(o, *f, *t)?)))
            .collect::<Result<Vec<_>, CliError>>()?
    };
    let columns = analyze::table_columns(&ds, &node, explicit)?;
    let boot = if a.no_boot {
        None
    } else if let Some((f, t)) = a.boot {
        Some(span_from(origin(&ds, &node)?, f, t)?)
    } else {
        find_phase(&ds, &node, ProfileName::Boot).ok()
    };
    let (tables, boot) = analyze::table5(&ds, &node, &columns, boot)?;
    Ok(match a.out.format {
        Format::Csv => oda_core::report::table5_csv(&tables, boot.as_ref()),
        Format::Json => render::table5_json(&tables, boot.as_ref()),
        _ => oda_core::report::table5_text(&tables, boot.as_ref()),
    })
}

pub fn plot(a: &PlotArgs) -> Result<(), CliError> {
    reject(a.format, &[Format::Svg, Format::Csv])?;
    let ds = Dataset::open(&a.source)?;
    let node = ds.pick_node(a.source.node.as_deref())?;
    let span = window(&ds, &node, &a.window)?;
    let metrics: Vec<String> = if a.metrics.is_empty() {
        RailName::ALL.iter().map(|r| r.metric_name()).collect()
    } else {
        a.metrics.clone()
    };
    let unit = if metrics.iter().all(|m| m.starts_with("power.")) { "mW" } else { "value" };
    let title = a.title.clone().unwrap_or_else(|| format!("{node}"));
    let mut chart = LineChart::new(title, "time [s]", unit);
    let t0 = origin(&ds, &node).unwrap_or(0.0);
    for m in &metrics {
        let pts = ds.series(&node, m, a.core)?;
        let mut sel = slice_points(&pts, span.start, span.end).to_vec();
        if let Some(w) = a.average {
            sel = window_points(&sel, w)?;
        }
        for p in &mut sel {
            p.t -= t0;
        }
        chart = chart.with_series(m.clone(), sel);
    }
    match (a.format, &a.output) {
        (Format::Csv, out) => print(&chart.to_csv(), out.as_deref()),
        (_, Some(out)) => {
            print(&chart.to_svg(), Some(out))?;
            print(&chart.to_csv(), Some(&out.with_extension("csv")))
        }
        (_, None) => print(&chart.to_svg(), None),
    }
}
