use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{Noise, RobotPose, SensorError};
use crate::rng;
use crate::world::{CoilFootprint, PipeScenario};

/// Coil placement relative to the robot datum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoilMount {
    /// mm along the pipe axis
    pub axial_offset: f64,
    /// degrees added to the module roll
    pub angle_offset: f64,
}

/// Eddy-current coil model: `Z = Z0 + k·overlap·exp(-liftoff·λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoilParams {
    /// Sensing footprint on the cast iron, mm.
    pub axial_extent: f64,
    pub circ_extent: f64,
    /// Encircling coils see the whole circumference; `circ_extent` is ignored.
    #[serde(default)]
    pub encircling: bool,
    pub excitation_freq: f64,
    pub excitation_amplitude: f64,
    pub base_impedance: Complex64,
    /// Impedance change per unit hole overlap.
    pub sensitivity: Complex64,
    /// Attenuation per mm of liftoff.
    pub liftoff_decay: f64,
    #[serde(default)]
    pub mount: CoilMount,
}

impl CoilParams {
    /// Point coil on the operational module used for radial centring.
    pub fn radial_default() -> Self {
        CoilParams {
            axial_extent: 18.0,
            circ_extent: 18.0,
            encircling: false,
            excitation_freq: 1_000.0,
            excitation_amplitude: 1.0,
            base_impedance: Complex64::new(10.0, 4.0),
            sensitivity: Complex64::new(6.0, -3.0),
            liftoff_decay: 0.05,
            mount: CoilMount::default(),
        }
    }

    pub fn footprint(&self, scenario: &PipeScenario, pose: &RobotPose) -> CoilFootprint {
        let circ = if self.encircling {
            2.0 * PI * scenario.inner_radius_cast()
        } else {
            self.circ_extent
        };
        CoilFootprint {
            z: pose.z + self.mount.axial_offset / 1000.0,
            theta: pose.roll + self.mount.angle_offset,
            axial_extent: self.axial_extent,
            circ_extent: circ,
        }
    }

    /// Factor applied to the hole response through `liftoff` mm of liner.
    pub fn attenuation(&self, liftoff: f64) -> f64 {
        (-liftoff * self.liftoff_decay).exp()
    }
}

/// Differential pair of encircling coils.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxialProbe {
    pub coil: CoilParams,
    /// Centre-to-centre distance of the two coils, mm.
    pub spacing: f64,
    /// Probe centre relative to the datum, mm.
    pub center_offset: f64,
}

impl Default for AxialProbe {
    fn default() -> Self {
        AxialProbe {
            coil: CoilParams {
                axial_extent: 10.0,
                circ_extent: 2.0 * PI * 50.0,
                encircling: true,
                excitation_freq: 1_000.0,
                excitation_amplitude: 1.0,
                base_impedance: Complex64::new(10.0, 4.0),
                sensitivity: Complex64::new(40.0, -20.0),
                liftoff_decay: 0.05,
                mount: CoilMount::default(),
            },
            spacing: 24.0,
            center_offset: 0.0,
        }
    }
}

impl AxialProbe {
    /// `(leading, trailing)`; the leading coil is further down the pipe.
    pub fn coils(&self) -> (CoilParams, CoilParams) {
        let mut lead = self.coil.clone();
        let mut trail = self.coil.clone();
        lead.mount.axial_offset = self.center_offset + self.spacing / 2.0;
        trail.mount.axial_offset = self.center_offset - self.spacing / 2.0;
        (lead, trail)
    }
}

pub fn coil_impedance(
    scenario: &PipeScenario,
    pose: &RobotPose,
    coil: &CoilParams,
    lined: bool,
) -> Complex64 {
    let overlap = scenario.hole_overlap(&coil.footprint(scenario, pose));
    let liftoff = if lined { scenario.liftoff() } else { 0.0 };
    coil.base_impedance + coil.sensitivity * (overlap * coil.attenuation(liftoff))
}

/// Time-stamped robot poses, microseconds.
pub type PoseTrack = Vec<(i64, RobotPose)>;

/// Linear interpolation of the track, clamped to its ends.
pub fn interpolate_pose(track: &[(i64, RobotPose)], t_us: f64) -> RobotPose {
    let Some(first) = track.first() else {
        return RobotPose::default();
    };
    if t_us <= first.0 as f64 {
        return first.1;
    }
    let idx = track.partition_point(|(t, _)| (*t as f64) <= t_us);
    if idx >= track.len() {
        return track[track.len() - 1].1;
    }
    let (ta, a) = &track[idx - 1];
    let (tb, b) = &track[idx];
    let w = (t_us - *ta as f64) / (*tb - *ta) as f64;
    RobotPose {
        z: a.z + w * (b.z - a.z),
        roll: a.roll + w * (b.roll - a.roll),
        tool_offset: std::array::from_fn(|k| {
            a.tool_offset[k] + w * (b.tool_offset[k] - a.tool_offset[k])
        }),
    }
}

/// Digitised coil voltage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawECSignal {
    pub sample_rate: f64,
    /// Timestamp of the first sample, µs.
    pub t0: i64,
    pub samples: Vec<f64>,
    pub pose_track: PoseTrack,
}

impl RawECSignal {
    pub fn timestamp_us(&self, n: usize) -> f64 {
        self.t0 as f64 + n as f64 * 1e6 / self.sample_rate
    }

    pub fn time_s(&self, n: usize) -> f64 {
        self.timestamp_us(n) * 1e-6
    }
}

/// `s(t) = |Z|·A·sin(2πft + arg Z) + noise` along a pose trajectory.
pub fn synthesize_ec_raw(
    scenario: &PipeScenario,
    trajectory: &[(i64, RobotPose)],
    coil: &CoilParams,
    sample_rate: f64,
    seed: u64,
    noise_sigma: f64,
) -> Result<RawECSignal, SensorError> {
    if !(coil.excitation_freq > 0.0) {
        return Err(SensorError::Parameter(
            "excitation frequency must be positive".into(),
        ));
    }
    if !(sample_rate > 2.0 * coil.excitation_freq) {
        return Err(SensorError::Sampling {
            sample_rate,
            excitation: coil.excitation_freq,
        });
    }
    if trajectory.is_empty() || trajectory.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(SensorError::Parameter(
            "trajectory timestamps must be strictly increasing".into(),
        ));
    }
    let noise = Noise::new(noise_sigma)?;
    let mut rng = rng::stream(seed, 0xEC);
    let lined = scenario.is_lined();
    let t0 = trajectory[0].0;
    let t_end = trajectory[trajectory.len() - 1].0;
    let n = ((t_end - t0) as f64 * sample_rate / 1e6).floor() as usize + 1;
    let omega = 2.0 * PI * coil.excitation_freq;

    let mut signal = RawECSignal {
        sample_rate,
        t0,
        samples: Vec::with_capacity(n),
        pose_track: trajectory.to_vec(),
    };
    for k in 0..n {
        let t_us = signal.timestamp_us(k);
        let pose = interpolate_pose(trajectory, t_us);
        let z = coil_impedance(scenario, &pose, coil, lined);
        let s = z.norm() * coil.excitation_amplitude * (omega * t_us * 1e-6 + z.arg()).sin();
        signal.samples.push(s + noise.sample(&mut rng));
    }
    Ok(signal)
}
