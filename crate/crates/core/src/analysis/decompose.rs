use serde::Serialize;

use super::{AnalysisError, BootSegmentation};
use crate::profiles::BootRegion;
use crate::telemetry::RailName;

/// Split of a rail's idle power into leakage, dynamic + clock-tree, and OS shares.
///
/// `leakage + dynamic_clock + os_power == reference_idle` up to float rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerDecomposition {
    pub rail: RailName,
    pub leakage: f64,
    pub dynamic_clock: f64,
    pub os_power: f64,
    pub reference_idle: f64,
    pub leakage_fraction: f64,
    pub dynamic_clock_fraction: f64,
    pub os_fraction: f64,
}

impl PowerDecomposition {
    pub fn component_sum(&self) -> f64 {
        self.leakage + self.dynamic_clock + self.os_power
    }
}

fn fraction(part: f64, whole: f64) -> f64 {
    if whole == 0.0 {
        0.0
    } else {
        part / whole
    }
}

fn check_level(name: &str, v: f64) -> Result<(), AnalysisError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(AnalysisError::InvalidInput(format!("{name} is not finite: {v}")))
    }
}

/// Decomposes from the three levels directly: R1 mean, R2 mean, idle.
pub fn decompose_levels(r1: f64, r2: f64, idle: f64, rail: RailName) -> Result<PowerDecomposition, AnalysisError> {
    check_level("R1", r1)?;
    check_level("R2", r2)?;
    check_level("idle", idle)?;
    if !(0.0 <= r1 && r1 <= r2 && r2 <= idle) {
        return Err(AnalysisError::NonMonotone(format!(
            "{rail}: need 0 <= R1 ({r1}) <= R2 ({r2}) <= idle ({idle})"
        )));
    }
    let leakage = r1;
    let dynamic_clock = r2 - r1;
    let os_power = idle - r2;
    Ok(PowerDecomposition {
        rail,
        leakage,
        dynamic_clock,
        os_power,
        reference_idle: idle,
        leakage_fraction: fraction(leakage, idle),
        dynamic_clock_fraction: fraction(dynamic_clock, idle),
        os_fraction: fraction(os_power, idle),
    })
}

/// Decomposes a rail's idle power using its R1/R2 means from a boot segmentation.
pub fn decompose_power(
    seg: &BootSegmentation,
    idle_power: f64,
    rail: RailName,
) -> Result<PowerDecomposition, AnalysisError> {
    let r1 = seg.mean(BootRegion::R1, rail).ok_or(AnalysisError::MissingRail(rail))?;
    let r2 = seg.mean(BootRegion::R2, rail).ok_or(AnalysisError::MissingRail(rail))?;
    decompose_levels(r1, r2, idle_power, rail)
}

/// Leakage (R1) alone as a share of idle.
///
/// Usable on rails whose R2 level exceeds idle (memory initialisation during
/// the bootloader), where the full three-way split does not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageShare {
    pub rail: RailName,
    pub leakage: f64,
    pub reference_idle: f64,
    pub fraction: f64,
}

pub fn leakage_share(r1: f64, idle: f64, rail: RailName) -> Result<LeakageShare, AnalysisError> {
    check_level("R1", r1)?;
    check_level("idle", idle)?;
    if !(0.0 <= r1 && r1 <= idle) {
        return Err(AnalysisError::NonMonotone(format!(
            "{rail}: need 0 <= R1 ({r1}) <= idle ({idle})"
        )));
    }
    Ok(LeakageShare { rail, leakage: r1, reference_idle: idle, fraction: fraction(r1, idle) })
}
