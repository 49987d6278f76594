//! Machining head kinematics, rotation stage, traction and toolpaths.

mod delta;
mod machining;
mod rotation;
mod toolpath;
mod traction;

pub use delta::{delta_fk, delta_ik, DeltaGeometry};
pub use machining::{simulate_machining, MachiningOutcome, SimParams};
pub use rotation::{nearest_roll_for, rotate_plan, RotationPlan};
pub use toolpath::{
    jam_risk, plan_bore, plan_pe_drill, Cutter, Material, MaterialParams, PeDrillPlan, Segment,
    SegmentKind, Toolpath,
};
pub use traction::{available_traction, traction_check};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::WorldError;

pub const SPINDLE_RPM_LIMIT: f64 = 8000.0;
pub const SPINDLE_TORQUE_LIMIT_NM: f64 = 0.5;
pub const SCREW_FORCE_LIMIT_N: f64 = 350.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("tool point {0:?} is out of reach")]
    Unreachable([f64; 3]),
    #[error("carriage {rail} at {position:.3} mm is outside its travel")]
    TravelLimit { rail: usize, position: f64 },
    #[error("kinematic error: {0}")]
    Kinematic(String),
    #[error("roll {0}° outside [0, 400]")]
    RotationRange(f64),
    #[error("per-screw force {force:.1} N exceeds {limit:.1} N")]
    ForceLimit { force: f64, limit: f64 },
    #[error("spindle torque {torque:.3} Nm exceeds {limit:.3} Nm")]
    TorqueLimit { torque: f64, limit: f64 },
    #[error("spindle speed {0} rpm outside (0, 8000]")]
    SpindleLimit(f64),
    #[error("cutter jammed in segment {0} with no retry left")]
    JamAbort(usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Machining configuration carried in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MachiningDefaults {
    pub delta: DeltaGeometry,
    pub cast_iron: MaterialParams,
    pub hdpe: MaterialParams,
    pub pe_cutter: Cutter,
    /// Plunge feed of the liner drill, mm/s.
    pub plunge_feed: f64,
    /// Plunge depth past the liner thickness, mm.
    pub plunge_overtravel: f64,
    /// Non-cutting moves, mm/s.
    pub rapid_feed: f64,
    pub bore_target_diameter: f64,
    pub liner_target_diameter: f64,
    pub pe_rpm: f64,
    pub feed_jitter_sigma: f64,
}

impl Default for MachiningDefaults {
    fn default() -> Self {
        MachiningDefaults {
            delta: DeltaGeometry::default(),
            cast_iron: MaterialParams::cast_iron(),
            hdpe: MaterialParams::hdpe(),
            pe_cutter: Cutter::default(),
            plunge_feed: 0.0204,
            plunge_overtravel: 1.0,
            rapid_feed: 20.0,
            bore_target_diameter: 24.4,
            liner_target_diameter: 23.0,
            pe_rpm: 3000.0,
            feed_jitter_sigma: 0.02,
        }
    }
}

impl MachiningDefaults {
    pub fn material(&self, material: Material) -> &MaterialParams {
        match material {
            Material::CastIron => &self.cast_iron,
            Material::Hdpe => &self.hdpe,
        }
    }
}
