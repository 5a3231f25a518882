use std::thread;

use oda_core::profiles::Workload;
use oda_core::telemetry::{quantize, Plugin, Point, RailName};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bundle::{Bundle, Manifest, NodeManifest, NodeTrace, PhaseRecord, Signal, SignalRecord};
use crate::scenario::{CounterSim, ProfileName, SimScenario, WorkloadProfile};
use crate::SimError;

/// Idle CPU temperature when no script covers the sensor.
const IDLE_CPU_TEMP: f64 = 39.0;

/// Builds every node's traces. Nodes are generated in parallel; output depends
/// only on the scenario.
pub fn generate(scenario: &SimScenario) -> Result<Bundle, SimError> {
    scenario.validate()?;
    let hosts = scenario.hostnames();
    let results: Vec<(NodeManifest, NodeTrace)> = thread::scope(|s| {
        let handles: Vec<_> = hosts.iter().map(|h| s.spawn(move || generate_node(scenario, h))).collect();
        handles.into_iter().map(|h| h.join().expect("generator thread panicked")).collect()
    });
    let (manifests, traces) = results.into_iter().unzip();
    Ok(Bundle { manifest: Manifest::new(scenario, manifests), nodes: traces })
}

struct Timeline {
    phases: Vec<(f64, f64, WorkloadProfile)>,
}

impl Timeline {
    fn new(scenario: &SimScenario, host: &str) -> Self {
        let mut at = 0.0;
        let phases = scenario
            .timeline(host)
            .iter()
            .map(|p| {
                let start = at;
                at += p.duration;
                (start, at, p.profile(scenario.noise))
            })
            .collect();
        Timeline { phases }
    }

    fn duration(&self) -> f64 {
        self.phases.last().map_or(0.0, |p| p.1)
    }

    /// Phase containing `offset` and the offset within it.
    fn at(&self, offset: f64) -> (&WorkloadProfile, f64) {
        let i = self.phases.partition_point(|p| p.1 <= offset).min(self.phases.len() - 1);
        let (start, _, prof) = &self.phases[i];
        (prof, offset - start)
    }

    /// False before the operating system of a booting node is up.
    fn os_up(&self, offset: f64) -> bool {
        let (prof, local) = self.at(offset);
        prof.boot.as_ref().is_none_or(|b| local >= b.os_start)
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn rng_for(scenario: &SimScenario, host: &str, sig: &Signal) -> ChaCha8Rng {
    let key = format!("{host}/{}/{:?}/{}", sig.plugin, sig.core, sig.metric);
    ChaCha8Rng::seed_from_u64(scenario.seed ^ fnv1a(&key))
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Sample offsets `k * period` in `[0, duration)`.
fn ticks(duration: f64, period: f64) -> impl Iterator<Item = f64> {
    let n = (duration / period - 1e-9).ceil().max(0.0) as u64;
    (0..n).map(move |k| k as f64 * period)
}

fn generate_node(scenario: &SimScenario, host: &str) -> (NodeManifest, NodeTrace) {
    let tl = Timeline::new(scenario, host);
    let duration = tl.duration();
    let stamp = |offset: f64| quantize(scenario.start + offset);
    let mut signals: Vec<(Signal, Vec<Point>)> = Vec::new();

    let power_period = 1.0 / scenario.power_rate;
    for rail in RailName::ALL {
        let sig = Signal::new(Plugin::PowerPub, None, rail.metric_name());
        let mut rng = rng_for(scenario, host, &sig);
        let pts = ticks(duration, power_period)
            .map(|off| {
                let (prof, local) = tl.at(off);
                let z = gauss(&mut rng);
                let v = (prof.level(rail, local) * (1.0 + prof.noise * z)).max(0.0);
                Point::new(stamp(off), quantize(v))
            })
            .collect();
        signals.push((sig, pts));
    }

    if let Some(c) = &scenario.counters {
        counters(scenario, host, &tl, c, &mut signals);
    }

    if scenario.stats_period > 0.0 {
        for (metric, level) in STATS {
            let sig = Signal::new(Plugin::StatsPub, None, metric);
            let mut rng = rng_for(scenario, host, &sig);
            let pts = ticks(duration, scenario.stats_period)
                .filter(|&off| tl.os_up(off))
                .map(|off| {
                    let (prof, _) = tl.at(off);
                    let v = level(busy(prof.name)) * (1.0 + prof.noise * gauss(&mut rng));
                    Point::new(stamp(off), quantize(v.max(0.0)))
                })
                .collect();
            signals.push((sig, pts));
        }
    }

    let scripts: Vec<_> = scenario.thermal.iter().filter(|t| t.node == host).collect();
    for t in &scripts {
        let sig = Signal::new(Plugin::StatsPub, None, format!("temperature.{}", t.sensor));
        let pts = ticks(duration, t.period)
            .filter(|&off| tl.os_up(off))
            .map(|off| Point::new(stamp(off), quantize(t.shape.at(off))))
            .collect();
        signals.push((sig, pts));
    }
    if scenario.stats_period > 0.0 && !scripts.iter().any(|t| t.sensor == "cpu_temp") {
        let sig = Signal::new(Plugin::StatsPub, None, "temperature.cpu_temp");
        let mut rng = rng_for(scenario, host, &sig);
        let pts = ticks(duration, scenario.stats_period)
            .filter(|&off| tl.os_up(off))
            .map(|off| {
                let (prof, _) = tl.at(off);
                Point::new(stamp(off), quantize(IDLE_CPU_TEMP * (1.0 + prof.noise * gauss(&mut rng))))
            })
            .collect();
        signals.push((sig, pts));
    }

    let records = signals
        .iter()
        .map(|(sig, pts)| SignalRecord { signal: sig.clone(), file: format!("{host}/{}", sig.file_name()), samples: pts.len() })
        .collect();
    let phases = tl
        .phases
        .iter()
        .map(|(start, end, p)| PhaseRecord {
            workload: p.name,
            start: *start,
            end: *end,
            noise: p.noise,
            means: p.means,
            boot: p.boot.clone(),
        })
        .collect();
    let manifest = NodeManifest { hostname: host.to_string(), duration, phases, signals: records };
    (manifest, NodeTrace { hostname: host.to_string(), signals })
}

/// Fraction of the cores kept busy by a workload.
fn busy(p: ProfileName) -> f64 {
    match p {
        ProfileName::Steady(Workload::Idle) => 0.02,
        ProfileName::Steady(Workload::Qe) => 0.95,
        ProfileName::Steady(_) => 1.0,
        ProfileName::Boot => 0.05,
    }
}

type Level = fn(f64) -> f64;

const STATS: [(&str, Level); 4] = [
    ("load_avg.1m", |b| 4.0 * b),
    ("total_cpu_usage.usr", |b| 97.0 * b),
    ("total_cpu_usage.sys", |b| 0.4 + 2.0 * b),
    ("total_cpu_usage.idl", |b| 99.5 - 99.0 * b),
];

fn counters(scenario: &SimScenario, host: &str, tl: &Timeline, c: &CounterSim, out: &mut Vec<(Signal, Vec<Point>)>) {
    let duration = tl.duration();
    for core in 0..c.cores {
        let cyc = Signal::new(Plugin::PmuPub, Some(core), "cycle");
        let ins = Signal::new(Plugin::PmuPub, Some(core), "instret");
        let mut rng = rng_for(scenario, host, &ins);
        let (mut cycles, mut instrs) = (0.0f64, 0.0f64);
        let mut cyc_pts = Vec::new();
        let mut ins_pts = Vec::new();
        for off in ticks(duration, c.period).filter(|&off| tl.os_up(off)) {
            let t = quantize(scenario.start + off);
            cyc_pts.push(Point::new(t, cycles.floor()));
            ins_pts.push(Point::new(t, instrs.floor()));
            let (prof, local) = tl.at(off);
            let jitter = (1.0 + prof.noise * gauss(&mut rng)).max(0.0);
            cycles += c.cycle_rate * c.period;
            instrs += c.instr_rate(prof.name, local) * jitter * c.period;
        }
        out.push((cyc, cyc_pts));
        out.push((ins, ins_pts));
    }
}
