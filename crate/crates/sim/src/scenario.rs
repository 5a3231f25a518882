//! Scenario description.
//!
//! ```toml
//! seed = 7
//! nodes = 8
//! power_rate = 1000.0
//!
//! [[phase]]
//! workload = "Boot"
//! duration = 60.0
//!
//! [[phase]]
//! workload = "HPL"
//! duration = 120.0
//!
//! [[thermal]]
//! node = "mc07"
//! shape = { kind = "ramp", from = 71.0, to = 107.0, span = 300.0 }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use oda_core::profiles::{BootRegion, BootSchedule, RailMeans, Workload};
use oda_core::telemetry::{RailName, TopicPath, Plugin};
use serde::{Deserialize, Serialize};

use crate::SimError;

/// A steady workload column or the boot sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProfileName {
    Steady(Workload),
    Boot,
}

impl fmt::Display for ProfileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileName::Steady(w) => f.write_str(w.as_str()),
            ProfileName::Boot => f.write_str("Boot"),
        }
    }
}

impl FromStr for ProfileName {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        if s.eq_ignore_ascii_case("boot") {
            return Ok(ProfileName::Boot);
        }
        s.parse::<Workload>()
            .map(ProfileName::Steady)
            .map_err(|_| SimError::InvalidScenario(format!("unknown workload {s:?}")))
    }
}

impl TryFrom<String> for ProfileName {
    type Error = SimError;

    fn try_from(s: String) -> Result<Self, SimError> {
        s.parse()
    }
}

impl From<ProfileName> for String {
    fn from(p: ProfileName) -> String {
        p.to_string()
    }
}

/// Rail levels of one phase, with optional boot timing.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadProfile {
    pub name: ProfileName,
    pub means: RailMeans,
    /// Relative standard deviation of per-sample gaussian noise.
    pub noise: f64,
    pub duration: f64,
    pub boot: Option<BootSchedule>,
}

impl WorkloadProfile {
    pub fn reference(name: ProfileName, duration: f64, noise: f64) -> Self {
        match name {
            ProfileName::Steady(w) => {
                WorkloadProfile { name, means: w.reference_means(), noise, duration, boot: None }
            }
            ProfileName::Boot => {
                let b = BootSchedule::reference();
                WorkloadProfile { name, means: b.r3, noise, duration, boot: Some(b) }
            }
        }
    }

    /// Noise-free level of `rail` at `offset` seconds into the phase.
    pub fn level(&self, rail: RailName, offset: f64) -> f64 {
        match &self.boot {
            None => self.means.get(rail),
            Some(b) if offset < b.power_on => 0.0,
            Some(b) if offset < b.pll_active => b.means(BootRegion::R1).get(rail),
            Some(b) if offset < b.os_start => b.means(BootRegion::R2).get(rail),
            Some(b) => b.means(BootRegion::R3).get(rail),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("{}: duration must be positive", self.name));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!("{}: noise must be non-negative", self.name));
        }
        let mut all = vec![self.means];
        if let Some(b) = &self.boot {
            if !b.is_ordered() {
                return bad("boot schedule must satisfy power_on < pll_active < os_start".into());
            }
            if b.os_start >= self.duration {
                return bad(format!("boot phase of {} s ends before the OS starts at {} s", self.duration, b.os_start));
            }
            all.extend([b.r1, b.r2, b.r3]);
        }
        if all.iter().flat_map(|m| m.0).any(|v| !(v >= 0.0 && v.is_finite())) {
            return bad(format!("{}: rail means must be non-negative", self.name));
        }
        Ok(())
    }
}

/// One segment of a node's timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub workload: ProfileName,
    pub duration: f64,
    /// Overrides of individual rail means (mW).
    #[serde(default)]
    pub means: BTreeMap<RailName, f64>,
    /// Overrides the scenario-wide noise.
    #[serde(default)]
    pub noise: Option<f64>,
}

impl Phase {
    pub fn new(workload: ProfileName, duration: f64) -> Self {
        Phase { workload, duration, means: BTreeMap::new(), noise: None }
    }

    pub fn profile(&self, default_noise: f64) -> WorkloadProfile {
        let mut p = WorkloadProfile::reference(self.workload, self.duration, self.noise.unwrap_or(default_noise));
        for (&rail, &mw) in &self.means {
            p.means.set(rail, mw);
            if let Some(b) = &mut p.boot {
                b.r3.set(rail, mw);
            }
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThermalShape {
    Steady { level: f64 },
    /// Linear from `from` to `to` over `span` seconds starting at `at`, then flat.
    Ramp {
        from: f64,
        to: f64,
        #[serde(default = "default_span")]
        span: f64,
        #[serde(default)]
        at: f64,
    },
    Step { before: f64, after: f64, at: f64 },
}

fn default_span() -> f64 {
    300.0
}

impl ThermalShape {
    /// °C at `offset` seconds from the start of the timeline.
    pub fn at(&self, offset: f64) -> f64 {
        match *self {
            ThermalShape::Steady { level } => level,
            ThermalShape::Ramp { from, to, span, at } => {
                let x = ((offset - at) / span).clamp(0.0, 1.0);
                from + (to - from) * x
            }
            ThermalShape::Step { before, after, at } => {
                if offset < at {
                    before
                } else {
                    after
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalScript {
    pub node: String,
    #[serde(default = "default_sensor")]
    pub sensor: String,
    pub shape: ThermalShape,
    /// Sampling period in seconds.
    #[serde(default = "default_thermal_period")]
    pub period: f64,
}

fn default_sensor() -> String {
    "cpu_temp".into()
}

fn default_thermal_period() -> f64 {
    1.0
}

/// Per-core cycle/instret counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterSim {
    pub period: f64,
    pub cores: u32,
    /// Cycles per second per core.
    pub cycle_rate: f64,
    /// Instructions per second per core, by workload name; missing ones use `default_ips`.
    pub ips: BTreeMap<String, f64>,
    pub default_ips: f64,
    /// A communication phase starts every `comm_every` seconds (0 disables).
    pub comm_every: f64,
    pub comm_len: f64,
    /// Instruction rate multiplier during communication.
    pub comm_factor: f64,
}

impl Default for CounterSim {
    fn default() -> Self {
        CounterSim {
            period: 0.5,
            cores: 4,
            cycle_rate: 1.0e9,
            ips: BTreeMap::from([
                ("Idle".into(), 0.02e9),
                ("HPL".into(), 0.9e9),
                ("STREAM.L2".into(), 0.6e9),
                ("STREAM.DDR".into(), 0.15e9),
                ("QE".into(), 0.7e9),
            ]),
            default_ips: 0.3e9,
            comm_every: 20.0,
            comm_len: 2.0,
            comm_factor: 0.25,
        }
    }
}

impl CounterSim {
    fn ips_for(&self, p: ProfileName) -> f64 {
        self.ips.get(&p.to_string()).copied().unwrap_or(self.default_ips)
    }

    /// Instruction rate at `offset` into a phase of workload `p`.
    pub fn instr_rate(&self, p: ProfileName, offset: f64) -> f64 {
        let base = self.ips_for(p);
        if self.comm_every > 0.0 && offset.rem_euclid(self.comm_every) >= self.comm_every - self.comm_len {
            base * self.comm_factor
        } else {
            base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimScenario {
    #[serde(default)]
    pub seed: u64,
    /// Epoch seconds of the first sample.
    #[serde(default = "default_start")]
    pub start: f64,
    #[serde(default = "default_org")]
    pub org: String,
    #[serde(default = "default_cluster")]
    pub cluster: String,
    /// Node count; hostnames default to mc01, mc02, ...
    #[serde(default = "one")]
    pub nodes: usize,
    #[serde(default)]
    pub hostnames: Vec<String>,
    /// Power samples per second per rail.
    #[serde(default = "default_rate")]
    pub power_rate: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    /// Timeline shared by every node.
    #[serde(rename = "phase", default)]
    pub phases: Vec<Phase>,
    /// Per-node timelines replacing the shared one.
    #[serde(default)]
    pub node_phases: BTreeMap<String, Vec<Phase>>,
    #[serde(default)]
    pub thermal: Vec<ThermalScript>,
    #[serde(default)]
    pub counters: Option<CounterSim>,
    /// Seconds between `stats_pub` samples; 0 disables them.
    #[serde(default = "default_stats_period")]
    pub stats_period: f64,
}

fn default_stats_period() -> f64 {
    5.0
}

fn default_start() -> f64 {
    1_650_000_000.0
}

fn default_org() -> String {
    "unibo".into()
}

fn default_cluster() -> String {
    "montecimone".into()
}

fn one() -> usize {
    1
}

fn default_rate() -> f64 {
    1000.0
}

fn default_noise() -> f64 {
    0.01
}

impl SimScenario {
    /// One node running `phases` with default settings.
    pub fn new(phases: Vec<Phase>) -> Self {
        SimScenario {
            seed: 0,
            start: default_start(),
            org: default_org(),
            cluster: default_cluster(),
            nodes: 1,
            hostnames: Vec::new(),
            power_rate: default_rate(),
            noise: default_noise(),
            phases,
            node_phases: BTreeMap::new(),
            thermal: Vec::new(),
            counters: None,
            stats_period: default_stats_period(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let s: SimScenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn hostnames(&self) -> Vec<String> {
        if self.hostnames.is_empty() {
            (1..=self.nodes).map(|i| format!("mc{i:02}")).collect()
        } else {
            self.hostnames.clone()
        }
    }

    pub fn timeline(&self, node: &str) -> &[Phase] {
        self.node_phases.get(node).map_or(&self.phases, Vec::as_slice)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        let hosts = self.hostnames();
        if hosts.is_empty() {
            return bad("at least one node is required".into());
        }
        if !self.hostnames.is_empty() && self.hostnames.len() != self.nodes && self.nodes != 1 {
            return bad(format!("nodes = {} but {} hostnames given", self.nodes, self.hostnames.len()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for h in &hosts {
            if !seen.insert(h) {
                return bad(format!("duplicate hostname {h}"));
            }
            TopicPath::new(&self.org, &self.cluster, h, Plugin::PowerPub, None, "power.core")
                .map_err(|e| SimError::InvalidScenario(e.to_string()))?;
        }
        for n in self.node_phases.keys().chain(self.thermal.iter().map(|t| &t.node)) {
            if !seen.contains(n) {
                return bad(format!("unknown node {n}"));
            }
        }
        if !(self.start > 0.0 && self.start.is_finite()) {
            return bad("start must be a positive epoch time".into());
        }
        if !(self.power_rate > 0.0 && self.power_rate.is_finite()) {
            return bad("power_rate must be positive".into());
        }
        for h in &hosts {
            let tl = self.timeline(h);
            if tl.is_empty() {
                return bad(format!("{h} has an empty timeline"));
            }
            for p in tl {
                p.profile(self.noise).validate()?;
            }
        }
        if !(self.stats_period >= 0.0 && self.stats_period.is_finite()) {
            return bad("stats_period must be non-negative".into());
        }
        for t in &self.thermal {
            if !(t.period > 0.0) {
                return bad(format!("thermal period for {} must be positive", t.node));
            }
            if let ThermalShape::Ramp { span, .. } = t.shape {
                if !(span > 0.0) {
                    return bad("thermal ramp span must be positive".into());
                }
            }
        }
        if let Some(c) = &self.counters {
            let dips_ok = c.comm_every <= 0.0 || (0.0..=c.comm_every).contains(&c.comm_len);
            if !(c.period > 0.0) || c.cores == 0 || !(c.cycle_rate >= 0.0) || !dips_ok {
                return bad("invalid counter simulation settings".into());
            }
        }
        Ok(())
    }

    /// Timeline length of `node` in seconds.
    pub fn duration(&self, node: &str) -> f64 {
        self.timeline(node).iter().map(|p| p.duration).sum()
    }
}
