//! Reference per-rail power levels of a U740 node (mW), used to drive the
//! synthetic backends and as expected values in closed-loop checks.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::telemetry::RailName;

/// Steady-state workload classes with a reference power column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Workload {
    Idle,
    #[serde(rename = "HPL")]
    Hpl,
    #[serde(rename = "STREAM.L2")]
    StreamL2,
    #[serde(rename = "STREAM.DDR")]
    StreamDdr,
    #[serde(rename = "QE")]
    Qe,
}

impl Workload {
    pub const ALL: [Workload; 5] = [
        Workload::Idle,
        Workload::Hpl,
        Workload::StreamL2,
        Workload::StreamDdr,
        Workload::Qe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Workload::Idle => "Idle",
            Workload::Hpl => "HPL",
            Workload::StreamL2 => "STREAM.L2",
            Workload::StreamDdr => "STREAM.DDR",
            Workload::Qe => "QE",
        }
    }

    pub fn reference_means(self) -> RailMeans {
        let col = match self {
            Workload::Idle => 0,
            Workload::Hpl => 1,
            Workload::StreamL2 => 2,
            Workload::StreamDdr => 3,
            Workload::Qe => 4,
        };
        RailMeans(std::array::from_fn(|r| POWER_TABLE[r][col] as f64))
    }

    /// Published column total; can differ from the rail sum by 1 mW of rounding.
    pub fn reference_total(self) -> f64 {
        match self {
            Workload::Idle => 4810.0,
            Workload::Hpl => 5935.0,
            Workload::StreamL2 => 5486.0,
            Workload::StreamDdr => 5336.0,
            Workload::Qe => 5670.0,
        }
    }

    /// Published integer percentage per rail, in [`RailName::ALL`] order.
    pub fn reference_percent(self) -> [u32; 9] {
        match self {
            Workload::Idle => [64, 3, 0, 0, 11, 12, 8, 1, 1],
            Workload::Hpl => [69, 3, 0, 0, 9, 9, 7, 1, 2],
            Workload::StreamL2 => [68, 3, 0, 0, 10, 10, 7, 1, 1],
            Workload::StreamDdr => [62, 4, 0, 0, 10, 10, 11, 1, 2],
            Workload::Qe => [67, 3, 0, 0, 9, 10, 8, 1, 2],
        }
    }
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Workload {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Workload::ALL
            .into_iter()
            .find(|w| w.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown workload {s:?}"))
    }
}

// Rows in RailName::ALL order; columns Idle, HPL, STREAM.L2, STREAM.DDR, QE, boot R1, boot R2.
const POWER_TABLE: [[u32; 7]; 9] = [
    [3075, 4097, 3714, 3287, 3825, 984, 2561],
    [139, 177, 170, 232, 176, 59, 197],
    [20, 20, 20, 20, 20, 5, 20],
    [1, 1, 1, 1, 1, 0, 2],
    [521, 527, 524, 522, 530, 12, 231],
    [555, 554, 554, 555, 561, 1, 395],
    [404, 440, 401, 592, 434, 275, 467],
    [28, 28, 28, 28, 28, 0, 29],
    [67, 90, 73, 98, 95, 49, 122],
];

/// A power level (mW) for each of the nine rails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RailMeans(pub [f64; 9]);

impl RailMeans {
    pub fn get(&self, rail: RailName) -> f64 {
        self.0[rail.index()]
    }

    pub fn set(&mut self, rail: RailName, mw: f64) {
        self.0[rail.index()] = mw;
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RailName, f64)> + '_ {
        RailName::ALL.into_iter().map(|r| (r, self.get(r)))
    }

    pub fn zero() -> Self {
        RailMeans([0.0; 9])
    }
}

impl Index<RailName> for RailMeans {
    type Output = f64;

    fn index(&self, rail: RailName) -> &f64 {
        &self.0[rail.index()]
    }
}

/// Boot phases: power-on without clocks, bootloader, operating system start-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BootRegion {
    R1,
    R2,
    R3,
}

impl BootRegion {
    pub const ALL: [BootRegion; 3] = [BootRegion::R1, BootRegion::R2, BootRegion::R3];
}

impl fmt::Display for BootRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BootRegion::R1 => "R1",
            BootRegion::R2 => "R2",
            BootRegion::R3 => "R3",
        })
    }
}

/// Reference boot sequence of a node: timing and per-region rail levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootSchedule {
    /// Supply switched on (start of R1), seconds from trace start.
    pub power_on: f64,
    /// Clock generation starts (start of R2).
    pub pll_active: f64,
    /// Operating system running (start of R3).
    pub os_start: f64,
    pub r1: RailMeans,
    pub r2: RailMeans,
    pub r3: RailMeans,
}

impl BootSchedule {
    pub fn reference() -> Self {
        let col = |c: usize| RailMeans(std::array::from_fn(|r| POWER_TABLE[r][c] as f64));
        let mut r3 = Workload::Idle.reference_means();
        r3.set(RailName::Core, 3082.0);
        BootSchedule {
            power_on: 4.0,
            pll_active: 10.0,
            os_start: 40.0,
            r1: col(5),
            r2: col(6),
            r3,
        }
    }

    pub fn means(&self, region: BootRegion) -> &RailMeans {
        match region {
            BootRegion::R1 => &self.r1,
            BootRegion::R2 => &self.r2,
            BootRegion::R3 => &self.r3,
        }
    }

    pub fn is_ordered(&self) -> bool {
        0.0 <= self.power_on && self.power_on < self.pll_active && self.pll_active < self.os_start
    }
}
