use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TelemetryError;

/// One of the nine independently measured supply lines of a node.
///
/// Declaration order is the canonical report row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RailName {
    Core,
    DdrSoc,
    Io,
    Pll,
    Pcievp,
    Pcievph,
    DdrMem,
    DdrPll,
    DdrVpp,
}

impl RailName {
    pub const ALL: [RailName; 9] = [
        RailName::Core,
        RailName::DdrSoc,
        RailName::Io,
        RailName::Pll,
        RailName::Pcievp,
        RailName::Pcievph,
        RailName::DdrMem,
        RailName::DdrPll,
        RailName::DdrVpp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RailName::Core => "core",
            RailName::DdrSoc => "ddr_soc",
            RailName::Io => "io",
            RailName::Pll => "pll",
            RailName::Pcievp => "pcievp",
            RailName::Pcievph => "pcievph",
            RailName::DdrMem => "ddr_mem",
            RailName::DdrPll => "ddr_pll",
            RailName::DdrVpp => "ddr_vpp",
        }
    }

    /// Position in [`RailName::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Metric name used on the `power_pub` topic.
    pub fn metric_name(self) -> String {
        format!("power.{}", self.as_str())
    }

    /// Inverse of [`RailName::metric_name`].
    pub fn from_metric_name(metric: &str) -> Option<RailName> {
        metric.strip_prefix("power.").and_then(|r| r.parse().ok())
    }

    pub fn subsystem(self) -> Subsystem {
        subsystem_of(self)
    }
}

impl fmt::Display for RailName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RailName {
    type Err = TelemetryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RailName::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| TelemetryError::UnknownRail(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Subsystem {
    Core,
    Ddr,
    Pci,
    Io,
    Pll,
}

impl Subsystem {
    pub const ALL: [Subsystem; 5] = [
        Subsystem::Core,
        Subsystem::Ddr,
        Subsystem::Pci,
        Subsystem::Io,
        Subsystem::Pll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subsystem::Core => "CORE",
            Subsystem::Ddr => "DDR",
            Subsystem::Pci => "PCI",
            Subsystem::Io => "IO",
            Subsystem::Pll => "PLL",
        }
    }

    pub fn rails(self) -> impl Iterator<Item = RailName> {
        RailName::ALL.into_iter().filter(move |r| subsystem_of(*r) == self)
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn subsystem_of(rail: RailName) -> Subsystem {
    match rail {
        RailName::Core => Subsystem::Core,
        RailName::DdrSoc | RailName::DdrMem | RailName::DdrPll | RailName::DdrVpp => Subsystem::Ddr,
        RailName::Pcievp | RailName::Pcievph => Subsystem::Pci,
        RailName::Io => Subsystem::Io,
        RailName::Pll => Subsystem::Pll,
    }
}
