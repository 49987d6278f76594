//! Synthetic measurements from the robot's sensor suite.
//!
//! Everything here is modelled at range or impedance level. Each sampling
//! call takes an explicit seed, so outputs are bitwise reproducible.

mod coil;
mod laser;
mod odometry;
mod profile;

pub use coil::{
    coil_impedance, interpolate_pose, synthesize_ec_raw, AxialProbe, CoilMount, CoilParams,
    PoseTrack, RawECSignal,
};
pub use laser::{sample_front_laser, FrontLaserParams, LaserReading};
pub use odometry::{sample_odometry, Odometer, OdometryModel};
pub use profile::{run_profile_scan, sample_profile_line, ProfileLine, ProfileScan, ScanParams};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::WorldError;

/// Mechanical rotation range of the operational module, degrees.
pub const ROLL_LIMIT_DEG: f64 = 400.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("requested sweep of {0}° exceeds the 400° rotation range")]
    RotationRange(f64),
    #[error("sample rate {sample_rate} Hz does not exceed twice the excitation {excitation} Hz")]
    Sampling { sample_rate: f64, excitation: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Pose of the robot datum (the operational module sensor plane).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotPose {
    /// Axial position, metres.
    pub z: f64,
    /// Module roll about the pipe axis, degrees in `[0, 400]`.
    pub roll: f64,
    /// Delta tool displacement from the module centre, mm.
    #[serde(default)]
    pub tool_offset: [f64; 3],
}

impl RobotPose {
    pub fn new(z: f64, roll: f64) -> Self {
        RobotPose {
            z,
            roll,
            tool_offset: [0.0; 3],
        }
    }

    pub fn roll_in_range(&self) -> bool {
        (0.0..=ROLL_LIMIT_DEG).contains(&self.roll)
    }
}

/// Sensor configuration carried in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorDefaults {
    pub front_laser: FrontLaserParams,
    pub front_laser_noise_sigma: f64,
    /// Travel between two front-laser readings, mm.
    pub reading_step_mm: f64,
    pub odometry: OdometryModel,
    pub profile: ScanParams,
    pub axial_probe: AxialProbe,
    pub radial_coil: CoilParams,
    pub ec_sample_rate: f64,
    /// Raw samples per lock-in block.
    pub ec_block: usize,
    pub ec_noise_sigma: f64,
}

impl Default for SensorDefaults {
    fn default() -> Self {
        SensorDefaults {
            front_laser: FrontLaserParams::default(),
            front_laser_noise_sigma: 0.2,
            reading_step_mm: 1.0,
            odometry: OdometryModel::default(),
            profile: ScanParams::default(),
            axial_probe: AxialProbe::default(),
            radial_coil: CoilParams::radial_default(),
            ec_sample_rate: 20_000.0,
            ec_block: 20,
            ec_noise_sigma: 0.02,
        }
    }
}

/// Gaussian noise source that is a no-op at zero sigma.
pub(crate) struct Noise {
    normal: Option<Normal<f64>>,
}

impl Noise {
    pub(crate) fn new(sigma: f64) -> Result<Self, SensorError> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(SensorError::Parameter(format!(
                "noise sigma {sigma} must be finite and >= 0"
            )));
        }
        let normal = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("valid sigma"));
        Ok(Noise { normal })
    }

    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match &self.normal {
            Some(n) => n.sample(rng),
            None => 0.0,
        }
    }
}
