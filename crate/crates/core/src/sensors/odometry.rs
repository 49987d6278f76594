use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Noise, SensorError};
use crate::rng;

/// Parametric stand-in for visual motion estimation.
///
/// A traversal draws one multiplicative scale error; every reading then
/// adds independent jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OdometryModel {
    pub scale_error_sigma: f64,
    /// mm
    pub jitter_sigma: f64,
    pub seed: u64,
}

impl Default for OdometryModel {
    fn default() -> Self {
        OdometryModel {
            scale_error_sigma: 0.01,
            jitter_sigma: 0.5,
            seed: 0,
        }
    }
}

pub struct Odometer {
    scale: f64,
    jitter: Noise,
    rng: ChaCha8Rng,
}

impl Odometer {
    pub fn new(model: &OdometryModel) -> Result<Self, SensorError> {
        let mut rng = rng::stream(model.seed, 0x0D0);
        let scale = 1.0 + Noise::new(model.scale_error_sigma)?.sample(&mut rng);
        Ok(Odometer {
            scale,
            jitter: Noise::new(model.jitter_sigma / 1000.0)?,
            rng,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Measured travel for a true travel in metres.
    pub fn read(&mut self, true_travel: f64) -> f64 {
        true_travel * self.scale + self.jitter.sample(&mut self.rng)
    }
}

/// `measured = true·(1 + N(0, σ_scale)) + N(0, σ_jitter)`, in metres.
pub fn sample_odometry(model: &OdometryModel, true_delta_z: f64) -> Result<f64, SensorError> {
    Ok(Odometer::new(model)?.read(true_delta_z))
}
