use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oda_core::telemetry::RailName;
use oda_sim::Speed;

use crate::data::{parse_offsets, SourceArgs};

#[derive(Debug, Parser)]
#[command(
    name = "oda",
    version,
    about = "Telemetry collection, storage and analysis for a small RISC-V cluster",
    after_help = "Exit status: 0 ok, 1 bad flags or config, 2 missing data, 3 analysis precondition violated."
)]
pub struct Cli {
    /// Log level (error, warn, info, debug, trace); RUST_LOG also works.
    #[arg(long, global = true, default_value = "warn")]
    pub log: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the sampling agent.
    #[command(subcommand)]
    Agent(AgentCmd),
    /// Ingest telemetry into a store and serve it over HTTP.
    Serve(ServeArgs),
    /// Generate or replay synthetic cluster traces.
    #[command(subcommand)]
    Sim(SimCmd),
    /// List series or print the points of one series.
    Query(QueryArgs),
    /// Run one analysis.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Render multi-workload reports.
    #[command(subcommand)]
    Report(ReportCmd),
    /// Plot series as SVG (with a CSV sidecar of the drawn points).
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Window start, seconds after the scenario start (bundles) or the node's
    /// first power sample (stores).
    #[arg(long)]
    pub from: Option<f64>,
    /// Window end, same origin as --from.
    #[arg(long)]
    pub to: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum AgentCmd {
    /// Sample until interrupted (or for --duration seconds).
    ///
    /// Publishes to the config's broker if set; otherwise samples go through an
    /// in-process bus into --store (or an in-memory store summarized at exit).
    Run(AgentRunArgs),
}

#[derive(Debug, Args)]
pub struct AgentRunArgs {
    /// Agent config file (TOML).
    #[arg(long, env = "ODA_CONFIG", value_name = "FILE")]
    pub config: PathBuf,
    #[arg(long, value_name = "SECS")]
    pub duration: Option<f64>,
    /// Store directory for broker-less runs.
    #[arg(long, value_name = "DIR")]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Store directory; in-memory if absent.
    #[arg(long, value_name = "DIR")]
    pub store: Option<PathBuf>,
    /// Also ingest everything published on this MQTT broker (host:port).
    #[arg(long, value_name = "HOST:PORT")]
    pub mqtt: Option<String>,
    /// Replay a bundle into the service once it is up.
    #[arg(long, value_name = "DIR")]
    pub replay: Option<PathBuf>,
    #[arg(long, default_value = "inf", value_parser = parse_speed)]
    pub speed: Speed,
    /// Run an agent in-process with this config.
    #[arg(long, value_name = "FILE")]
    pub agent: Option<PathBuf>,
    /// Shut down after this many seconds instead of waiting for Ctrl-C.
    #[arg(long, value_name = "SECS")]
    pub duration: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Write a trace bundle for a scenario.
    Generate(SimGenerateArgs),
    /// Publish a bundle with its original timestamps.
    Replay(SimReplayArgs),
}

#[derive(Debug, Args)]
pub struct SimGenerateArgs {
    /// Scenario file (TOML).
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimReplayArgs {
    #[arg(long, value_name = "DIR")]
    pub bundle: PathBuf,
    /// Trace seconds per wall second, or "inf".
    #[arg(long, default_value = "1", value_parser = parse_speed)]
    pub speed: Speed,
    /// Ingest into this store directory through an in-process bus.
    #[arg(long, value_name = "DIR", required_unless_present = "mqtt", conflicts_with = "mqtt")]
    pub store: Option<PathBuf>,
    /// Publish to this MQTT broker (host:port) instead.
    #[arg(long, value_name = "HOST:PORT")]
    pub mqtt: Option<String>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Metric to print, e.g. power.core; lists series when absent.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub core: Option<u32>,
    /// Inclusive range start, epoch seconds.
    #[arg(long)]
    pub start: Option<f64>,
    /// Inclusive range end, epoch seconds.
    #[arg(long)]
    pub end: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCmd {
    /// Per-rail means, shares and subsystem split over one window.
    PowerTable(PowerTableArgs),
    /// Boot segmentation and leakage / dynamic+clock / OS split.
    BootDecompose(BootDecomposeArgs),
    /// Sustained over peak throughput.
    Efficiency(EfficiencyArgs),
    /// Strong-scaling speedup and linear fraction.
    Scaling(ScalingArgs),
    /// WARN / CRITICAL / RUNAWAY events on temperature series.
    Thermal(ThermalArgs),
}

#[derive(Debug, Args)]
pub struct PowerTableArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Use the bundle phase running this workload as the window.
    #[arg(long)]
    pub workload: Option<String>,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Column label when no --workload is given.
    #[arg(long, default_value = "window")]
    pub label: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BootDecomposeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Boot window; bundles default to their Boot phase.
    #[command(flatten)]
    pub window: WindowArgs,
    /// Rails to split fully.
    #[arg(long = "rail", default_value = "core")]
    pub rails: Vec<RailName>,
    /// Rails to report leakage share only.
    #[arg(long = "leakage-rail")]
    pub leakage_rails: Vec<RailName>,
    /// Idle reference (mW); else an Idle phase mean, else the R3 mean.
    #[arg(long)]
    pub idle: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    /// Sustained FLOP/s.
    #[arg(long, conflicts_with_all = ["bandwidth", "hpl", "stream"])]
    pub sustained: Option<f64>,
    /// Sustained bytes/s of one node.
    #[arg(long, conflicts_with_all = ["hpl", "stream"])]
    pub bandwidth: Option<f64>,
    /// HPL output file.
    #[arg(long, value_name = "FILE", conflicts_with = "stream")]
    pub hpl: Option<PathBuf>,
    /// STREAM output file.
    #[arg(long, value_name = "FILE")]
    pub stream: Option<PathBuf>,
    /// Nodes used by the run.
    #[arg(long, default_value_t = 1)]
    pub nodes: u32,
    #[arg(long, default_value_t = 4)]
    pub cores: u32,
    /// Peak FLOP/s per core.
    #[arg(long, default_value_t = 1.0e9)]
    pub peak_per_core: f64,
    /// Peak memory bandwidth per node, bytes/s.
    #[arg(long, default_value_t = 7760.0e6)]
    pub peak_bw: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Single-node throughput.
    #[arg(long)]
    pub single: f64,
    /// Multi-node throughput.
    #[arg(long)]
    pub multi: f64,
    /// Nodes of the multi-node run.
    #[arg(long)]
    pub nodes: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThermalArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// °C
    #[arg(long, default_value_t = 60.0)]
    pub warn: f64,
    /// °C
    #[arg(long, default_value_t = 95.0)]
    pub critical: f64,
    /// °C/s
    #[arg(long, default_value_t = 1.0)]
    pub runaway_rate: f64,
    /// Seconds.
    #[arg(long, default_value_t = 10.0)]
    pub runaway_window: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    /// Nine-rail table with integer mW and percent per workload, plus boot R1/R2.
    Table5(Table5Args),
}

#[derive(Debug, Args)]
pub struct Table5Args {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Column as NAME=FROM:TO offsets; bundles default to their workload phases.
    #[arg(long = "phase", value_parser = parse_phase)]
    pub phases: Vec<(String, (Option<f64>, Option<f64>))>,
    /// Boot window FROM:TO; bundles default to their Boot phase.
    #[arg(long, value_parser = parse_offsets)]
    pub boot: Option<(Option<f64>, Option<f64>)>,
    /// Leave out the boot columns.
    #[arg(long)]
    pub no_boot: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Metrics to draw; defaults to all nine rails.
    #[arg(long = "metric")]
    pub metrics: Vec<String>,
    #[arg(long)]
    pub core: Option<u32>,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Averaging window in seconds.
    #[arg(long)]
    pub average: Option<f64>,
    #[arg(long)]
    pub title: Option<String>,
    /// svg or csv.
    #[arg(long, value_enum, default_value = "svg")]
    pub format: Format,
    /// Output file; an SVG also gets a .csv sidecar next to it.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

fn parse_speed(s: &str) -> Result<Speed, String> {
    s.parse().map_err(|e: oda_sim::SimError| e.to_string())
}

fn parse_phase(s: &str) -> Result<(String, (Option<f64>, Option<f64>)), String> {
    let (name, range) = s.split_once('=').ok_or_else(|| format!("expected NAME=FROM:TO, got {s:?}"))?;
    if name.is_empty() {
        return Err("empty column name".into());
    }
    Ok((name.to_string(), parse_offsets(range)?))
}
