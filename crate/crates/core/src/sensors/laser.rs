use serde::{Deserialize, Serialize};

use super::{Noise, SensorError};
use crate::rng;
use crate::world::{PipeScenario, SurfaceSample};

/// Ring projected by the front laser ahead of the robot datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontLaserParams {
    /// Distance from the datum to the laser ring, mm.
    pub lookahead: f64,
    /// Angular spacing of ring samples, degrees.
    pub ring_step: f64,
    /// First sampled angle and covered arc. A partial arc leaves branches
    /// outside it unseen.
    pub arc_start: f64,
    pub arc_span: f64,
}

impl Default for FrontLaserParams {
    fn default() -> Self {
        FrontLaserParams {
            lookahead: 250.0,
            ring_step: 1.0,
            arc_start: 0.0,
            arc_span: 360.0,
        }
    }
}

impl FrontLaserParams {
    pub fn ring_len(&self) -> usize {
        ((self.arc_span / self.ring_step).round() as usize).max(1)
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.arc_start + k as f64 * self.ring_step
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserReading {
    /// True axial position of the ring, metres (simulation ground truth).
    pub ring_z: f64,
    pub arc_start: f64,
    pub ring_step: f64,
    /// One range per ring sample, `None` for a missing return.
    pub ranges: Vec<Option<f64>>,
}

/// Sample the laser ring while the datum sits at `z`.
pub fn sample_front_laser(
    scenario: &PipeScenario,
    z: f64,
    params: &FrontLaserParams,
    noise_sigma: f64,
    seed: u64,
) -> Result<LaserReading, SensorError> {
    if !(params.ring_step > 0.0) {
        return Err(SensorError::Parameter("ring step must be positive".into()));
    }
    let ring_z = z + params.lookahead / 1000.0;
    let lined = scenario.is_lined();
    // validates the range once; also the value for every plain-wall sample
    let wall = match scenario.surface_radius_at(ring_z, params.arc_start, false)? {
        SurfaceSample::Wall { radius } => radius,
        SurfaceSample::HoleInterior { .. } => scenario.inner_radius_cast(),
    };
    let bore = if lined { scenario.bore_radius() } else { wall };
    let n = params.ring_len();
    let noise = Noise::new(noise_sigma)?;
    let mut rng = rng::stream(seed, ring_z.to_bits());

    let near_hole = !lined
        && scenario
            .branches()
            .iter()
            .any(|b| ((ring_z - b.axial_pos) * 1000.0).abs() <= b.hole_radius());
    let ranges = if near_hole {
        let cast = scenario.inner_radius_cast();
        (0..n)
            .map(|k| {
                let truth = match scenario.surface_radius_at(ring_z, params.angle(k), false)? {
                    SurfaceSample::Wall { radius } => Some(radius),
                    SurfaceSample::HoleInterior { depth_to_valve } => {
                        depth_to_valve.map(|d| cast + d)
                    }
                };
                Ok(truth.map(|r| r + noise.sample(&mut rng)))
            })
            .collect::<Result<Vec<_>, SensorError>>()?
    } else {
        (0..n)
            .map(|_| Some(bore + noise.sample(&mut rng)))
            .collect()
    };
    Ok(LaserReading {
        ring_z,
        arc_start: params.arc_start,
        ring_step: params.ring_step,
        ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{build_scenario, templates, LinerSpec};

    fn lab() -> PipeScenario {
        build_scenario(&templates::lab8m()).unwrap()
    }

    #[test]
    fn plain_ring_is_constant() {
        let r = sample_front_laser(&lab(), 1.0, &FrontLaserParams::default(), 0.0, 0).unwrap();
        assert_eq!(r.ranges.len(), 360);
        assert!(r.ranges.iter().all(|&x| x == Some(50.0)));
    }

    #[test]
    fn centred_hole_arc_matches_chord_geometry() {
        let s = lab();
        let params = FrontLaserParams {
            ring_step: 0.05,
            ..FrontLaserParams::default()
        };
        // ring through the centre of the branch at 3.0 m, θ = 0
        let r = sample_front_laser(&s, 3.0 - 0.25, &params, 0.0, 0).unwrap();
        let hits = r.ranges.iter().filter(|&&x| x != Some(50.0)).count();
        let arc = hits as f64 * params.ring_step;
        let chord = 2.0 * (10.0f64 / 50.0).asin().to_degrees();
        // the unrolled disc subtends 2r/R; both agree within 1%
        assert!(
            (arc - chord).abs() <= 0.01 * chord + params.ring_step,
            "arc {arc} vs {chord}"
        );
    }

    #[test]
    fn lined_ring_hides_holes() {
        let s = lab().relined(LinerSpec::default()).unwrap();
        let r = sample_front_laser(&s, 3.0 - 0.25, &FrontLaserParams::default(), 0.0, 0).unwrap();
        assert!(r.ranges.iter().all(|&x| x == Some(40.0)));
    }

    #[test]
    fn ring_beyond_end() {
        assert!(sample_front_laser(&lab(), 7.9, &FrontLaserParams::default(), 0.0, 0).is_err());
    }
}
