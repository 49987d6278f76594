//! Two-pass mission runner and its artifacts.
//!
//! Pass 1 maps, characterises and bores the branches of a bare cast-iron
//! pipe. Pass 2 relocates the mapped branches through the liner with the
//! eddy-current probes and drills the liner open.

mod log;
mod map;
mod pass1;
mod pass2;
mod report;
mod state;

pub use log::{LogRecord, MissionLog};
pub use map::{
    load_map, save_map, BranchMap, EntryStatus, MachiningRecord, MapEntry, PassRecord, Provenance,
    MAP_FORMAT, MAP_VERSION,
};
pub use pass1::{run_pass1, Pass1Output, StoredCloud};
pub use pass2::{run_pass2, EcTrace, Pass2Output, StoredGrid};
pub use report::{mission_report, MissionReport, REFERENCE_MINUTES};
pub use state::{MissionState, Pass, Phase};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::motion::{
    simulate_machining, MachiningDefaults, MachiningOutcome, MotionError, SimParams, Toolpath,
};
use crate::perception::{
    AxialLocalizeParams, ComplianceLimits, FrontDetectParams, GridSpec, HoleFitParams,
    PerceptionError,
};
use crate::sensors::{SensorDefaults, SensorError};
use crate::world::{PipeScenario, ScenarioConfig, WorldError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MissionError {
    #[error("mission aborted: {0}")]
    Abort(String),
    #[error("illegal phase transition {from:?} -> {to:?}")]
    IllegalTransition { from: Phase, to: Phase },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Mission-level settings on top of the scenario's sensor and machining defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionConfig {
    pub sensors: SensorDefaults,
    pub machining: MachiningDefaults,
    /// Cruise speed, m/s.
    pub traverse_speed: f64,
    /// Speed of the eddy-current relocation sweep, m/s.
    pub ec_speed: f64,
    /// Traction needed to pull the umbilical and liner drag, N.
    pub drag_force: f64,
    /// Rotation stage speed, deg/s.
    pub roll_speed: f64,
    /// Distance from the front-laser rear-wall detection back to the
    /// expected hole centre, mm.
    pub rear_wall_correction: f64,
    pub front: FrontDetectParams,
    pub hole_fit: HoleFitParams,
    pub compliance: ComplianceLimits,
    pub axial: AxialLocalizeParams,
    pub grid: GridSpec,
    /// Half width of the relocation search around the mapped position, m.
    pub search_window: f64,
    pub relocation_tolerance_mm: f64,
    /// Spindle increase for the single retry after a jam.
    pub jam_retry_rpm_step: f64,
    pub seed: u64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig {
            sensors: SensorDefaults::default(),
            machining: MachiningDefaults::default(),
            traverse_speed: 0.10,
            ec_speed: 0.05,
            drag_force: 300.0,
            roll_speed: 36.0,
            rear_wall_correction: 10.0,
            front: FrontDetectParams::default(),
            hole_fit: HoleFitParams::default(),
            compliance: ComplianceLimits::default(),
            axial: AxialLocalizeParams::default(),
            grid: GridSpec::default(),
            search_window: 0.2,
            relocation_tolerance_mm: 2.0,
            jam_retry_rpm_step: 300.0,
            seed: 0,
        }
    }
}

impl MissionConfig {
    pub fn from_scenario_config(config: &ScenarioConfig, seed: u64) -> Self {
        MissionConfig {
            sensors: config.sensors.clone(),
            machining: config.machining.clone(),
            seed,
            ..MissionConfig::default()
        }
    }
}

/// Seed tags of the mission's random streams.
pub(crate) mod tags {
    pub const ODOMETRY: u64 = 0x0D0;
    pub const LASER: u64 = 0x1A5;
    pub const SCAN: u64 = 0x5CA_0000;
    pub const MACHINE: u64 = 0x3AC_0000;
    pub const EC_LEAD: u64 = 0xEC1_0000;
    pub const EC_TRAIL: u64 = 0xEC2_0000;
    pub const GRID: u64 = 0x621_0000;
}

/// Result of one machining operation under the jam policy.
pub(crate) struct Machined {
    pub outcome: MachiningOutcome,
    pub scenario: PipeScenario,
    pub rpm: f64,
    pub path: Toolpath,
    pub jams: u32,
}

/// Run `plan(rpm)`; after a jam, replan once at a higher spindle speed.
pub(crate) fn machine_with_retry(
    scenario: &PipeScenario,
    branch: usize,
    rpm: f64,
    config: &MissionConfig,
    seed: u64,
    plan: impl Fn(f64) -> Result<Toolpath, MotionError>,
) -> Result<Machined, MotionError> {
    let sim = SimParams {
        retries: 0,
        feed_jitter_sigma: config.machining.feed_jitter_sigma,
    };
    let mut rpm = rpm;
    let mut jams = 0;
    loop {
        let path = plan(rpm)?;
        match simulate_machining(
            scenario,
            branch,
            &path,
            &sim,
            crate::rng::derive(seed, jams as u64),
        ) {
            Ok((outcome, next)) => {
                return Ok(Machined {
                    outcome,
                    scenario: next,
                    rpm,
                    path,
                    jams,
                })
            }
            Err(MotionError::JamAbort(_)) if jams == 0 => {
                jams += 1;
                rpm += config.jam_retry_rpm_step;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Index of the true branch nearest `(z, θ)` within `tolerance_mm` axially.
pub(crate) fn nearest_branch(scenario: &PipeScenario, z: f64, tolerance_mm: f64) -> Option<usize> {
    scenario
        .branches()
        .iter()
        .enumerate()
        .map(|(i, b)| (i, ((b.axial_pos - z) * 1000.0).abs()))
        .filter(|(_, d)| *d <= tolerance_mm)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}
