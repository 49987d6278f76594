//! Branch detection, characterisation and through-liner relocation.

mod circle_fit;
mod eddy;
mod front;
mod hole;
mod profilometry;

pub use circle_fit::{fit_circle, Circle};
pub use eddy::{
    acquire_radial_grid, ec_axial_localize, ec_axial_localize_all, ec_radial_center,
    AxialLocalization, AxialLocalizeParams, GridSpec, ScanGrid,
};
pub use front::{
    collect_front_readings, detect_branches_front, inter_branch_distances, FrontDetectParams,
    FrontReadings,
};
pub use hole::{
    assess_compliance, fit_hole, ComplianceLimits, ComplianceReason, ComplianceReport,
    HoleCharacterization, HoleFitParams,
};
pub use profilometry::{
    compare_reconstructions, cylinder_residual, reconstruct_cloud, DeviationStats, PointCloud,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::DspError;
use crate::sensors::SensorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error("no hole region in the point cloud")]
    NoHole,
    #[error("hole fit residual {rms:.3} mm exceeds {bound:.3} mm")]
    PoorFit { rms: f64, bound: f64 },
    #[error("no detection: {0}")]
    NoDetection(String),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMethod {
    FrontLaser,
    EcAxial,
    EcRadial,
    Profilometry,
}

impl DetectionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionMethod::FrontLaser => "front_laser",
            DetectionMethod::EcAxial => "ec_axial",
            DetectionMethod::EcRadial => "ec_radial",
            DetectionMethod::Profilometry => "profilometry",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDetection {
    /// Metres, in the odometry frame of the traversal.
    pub axial_pos_est: f64,
    /// Degrees, when the sensor resolves the angle.
    pub angular_pos_est: Option<f64>,
    pub method: DetectionMethod,
    pub confidence: f64,
    /// Set when the position marks the hole's rear wall rather than its centre.
    pub rear_wall_flag: bool,
}
