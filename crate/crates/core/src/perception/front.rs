use serde::{Deserialize, Serialize};

use super::{BranchDetection, DetectionMethod, PerceptionError};
use crate::geometry::wrap_deg;
use crate::rng;
use crate::sensors::{sample_front_laser, FrontLaserParams, LaserReading, Odometer, SensorError};
use crate::world::PipeScenario;

/// Laser rings paired with the odometry estimate of the ring position, metres.
pub type FrontReadings = Vec<(LaserReading, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontDetectParams {
    /// Range jump flagging a ring sample as inside a hole, mm.
    pub jump_threshold: f64,
}

impl Default for FrontDetectParams {
    fn default() -> Self {
        FrontDetectParams {
            jump_threshold: 3.0,
        }
    }
}

/// Read the front laser every `step_mm` of datum travel over `[start, end]`.
///
/// The odometer integrates travel from `start`, whose position is known.
#[allow(clippy::too_many_arguments)]
pub fn collect_front_readings(
    scenario: &PipeScenario,
    start: f64,
    end: f64,
    laser: &FrontLaserParams,
    noise_sigma: f64,
    step_mm: f64,
    odometer: &mut Odometer,
    seed: u64,
) -> Result<FrontReadings, SensorError> {
    if !(step_mm > 0.0) {
        return Err(SensorError::Parameter(
            "reading step must be positive".into(),
        ));
    }
    let count = (((end - start) * 1000.0 / step_mm) + 1e-9).floor();
    if count < 0.0 {
        return Ok(Vec::new());
    }
    (0..=count as usize)
        .map(|k| {
            let z = start + k as f64 * step_mm / 1000.0;
            let reading =
                sample_front_laser(scenario, z, laser, noise_sigma, rng::derive(seed, k as u64))?;
            let estimate = start + odometer.read(z - start) + laser.lookahead / 1000.0;
            Ok((reading, estimate))
        })
        .collect()
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        0.5 * (values[m - 1] + values[m])
    } else {
        values[m]
    })
}

/// Sum of unit vectors of the discontinuous ring angles, or `None`.
fn discontinuity(reading: &LaserReading, threshold: f64) -> Option<(f64, f64, usize)> {
    let (mut lo, mut hi, mut missing) = (f64::INFINITY, f64::NEG_INFINITY, false);
    for r in &reading.ranges {
        match r {
            Some(r) => {
                lo = lo.min(*r);
                hi = hi.max(*r);
            }
            None => missing = true,
        }
    }
    if !missing && hi - lo <= threshold {
        return None;
    }
    let mut present: Vec<f64> = reading.ranges.iter().flatten().copied().collect();
    let baseline = median(&mut present);
    let mut acc = (0.0, 0.0, 0usize);
    for (k, r) in reading.ranges.iter().enumerate() {
        let jump = match (r, baseline) {
            (Some(r), Some(b)) => (r - b).abs() > threshold,
            _ => true,
        };
        if jump {
            let a = (reading.arc_start + k as f64 * reading.ring_step).to_radians();
            acc.0 += a.cos();
            acc.1 += a.sin();
            acc.2 += 1;
        }
    }
    (acc.2 > 0).then_some(acc)
}

/// One detection per run of consecutive rings showing a range discontinuity.
///
/// The reported position is the odometry estimate of the last ring of the
/// run, i.e. where the laser leaves the hole's rear wall.
pub fn detect_branches_front(
    readings: &[(LaserReading, f64)],
    params: &FrontDetectParams,
) -> Vec<BranchDetection> {
    let mut detections = Vec::new();
    let mut run: Option<(f64, f64, usize, usize, f64)> = None;
    let close = |run: (f64, f64, usize, usize, f64), out: &mut Vec<BranchDetection>| {
        let (c, s, _, rings, z_last) = run;
        out.push(BranchDetection {
            axial_pos_est: z_last,
            angular_pos_est: Some(wrap_deg(s.atan2(c).to_degrees())),
            method: DetectionMethod::FrontLaser,
            confidence: (rings as f64 / 5.0).min(1.0),
            rear_wall_flag: true,
        });
    };
    for (reading, z_est) in readings {
        match (discontinuity(reading, params.jump_threshold), run.as_mut()) {
            (Some((c, s, n)), Some(r)) => {
                r.0 += c;
                r.1 += s;
                r.2 += n;
                r.3 += 1;
                r.4 = *z_est;
            }
            (Some((c, s, n)), None) => run = Some((c, s, n, 1, *z_est)),
            (None, Some(_)) => close(run.take().expect("open run"), &mut detections),
            (None, None) => {}
        }
    }
    if let Some(r) = run {
        close(r, &mut detections);
    }
    detections
}

/// Consecutive differences of detected positions, metres.
pub fn inter_branch_distances(detections: &[BranchDetection]) -> Result<Vec<f64>, PerceptionError> {
    if detections.len() < 2 {
        return Err(PerceptionError::InsufficientData(format!(
            "{} detection(s), need at least 2",
            detections.len()
        )));
    }
    Ok(detections
        .windows(2)
        .map(|w| w[1].axial_pos_est - w[0].axial_pos_est)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensors::OdometryModel;
    use crate::world::{build_scenario, templates, BranchConnection, ScenarioConfig};

    fn noiseless_odometer() -> Odometer {
        Odometer::new(&OdometryModel {
            scale_error_sigma: 0.0,
            jitter_sigma: 0.0,
            seed: 0,
        })
        .unwrap()
    }

    fn single(z: f64, theta: f64) -> PipeScenario {
        let mut cfg: ScenarioConfig = templates::lab8m();
        cfg.branches = vec![BranchConnection {
            axial_pos: z,
            angular_pos: theta,
            hole_diameter: 20.0,
            valve_axis_offset: 0.0,
            valve_depth: 30.0,
            hardware_present: true,
            liner_opening_diameter: None,
        }];
        build_scenario(&cfg).unwrap()
    }

    fn detect(s: &PipeScenario, laser: &FrontLaserParams) -> Vec<BranchDetection> {
        let end = s.length() - laser.lookahead / 1000.0;
        let readings =
            collect_front_readings(s, 0.0, end, laser, 0.0, 1.0, &mut noiseless_odometer(), 1)
                .unwrap();
        detect_branches_front(&readings, &FrontDetectParams::default())
    }

    #[test]
    fn rear_wall_position() {
        let s = single(3.0, 45.0);
        let d = detect(&s, &FrontLaserParams::default());
        assert_eq!(d.len(), 1);
        assert!(d[0].rear_wall_flag);
        // analytic rear edge: centre + hole radius
        assert!(
            (d[0].axial_pos_est - 3.010).abs() <= 0.001 + 1e-9,
            "{}",
            d[0].axial_pos_est
        );
        assert!((d[0].angular_pos_est.unwrap() - 45.0).abs() < 1.0);
    }

    #[test]
    fn empty_pipe_has_no_detection() {
        let mut cfg = templates::lab8m();
        cfg.branches.clear();
        let s = build_scenario(&cfg).unwrap();
        assert!(detect(&s, &FrontLaserParams::default()).is_empty());
    }

    #[test]
    fn branch_outside_laser_arc_is_missed() {
        let s = single(3.0, 180.0);
        let laser = FrontLaserParams {
            arc_start: 270.0,
            arc_span: 180.0,
            ..FrontLaserParams::default()
        };
        assert!(detect(&s, &laser).is_empty());
        let s = single(3.0, 10.0);
        assert_eq!(detect(&s, &laser).len(), 1);
    }

    #[test]
    fn distances_need_two() {
        let d = BranchDetection {
            axial_pos_est: 1.0,
            angular_pos_est: None,
            method: DetectionMethod::FrontLaser,
            confidence: 1.0,
            rear_wall_flag: true,
        };
        assert!(inter_branch_distances(std::slice::from_ref(&d)).is_err());
        let e = BranchDetection {
            axial_pos_est: 2.635,
            ..d.clone()
        };
        let gaps = inter_branch_distances(&[d, e]).unwrap();
        assert!((gaps[0] - 1.635).abs() < 1e-12);
    }
}
