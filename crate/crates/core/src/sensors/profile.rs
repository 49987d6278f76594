use serde::{Deserialize, Serialize};

use super::{Noise, RobotPose, SensorError, ROLL_LIMIT_DEG};
use crate::rng;
use crate::world::{PipeScenario, SurfaceSample};

/// Per-step time reproducing a 10 minute full-turn scan at 1° steps.
pub const DEFAULT_STEP_TIME_S: f64 = 1.667;

/// One laser stripe observed at a fixed module roll.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileLine {
    pub theta: f64,
    /// `(z_local mm, range mm)`; `None` is a missing return.
    pub samples: Vec<(f64, Option<f64>)>,
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileScan {
    pub lines: Vec<ProfileLine>,
    pub angular_step: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanParams {
    pub sweep: f64,
    pub angular_step: f64,
    pub per_step_time: f64,
    /// Axial stripe length, mm, centred on the datum.
    pub window: f64,
    /// Axial sample spacing along the stripe, mm.
    pub z_step: f64,
    pub noise_sigma: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            sweep: 60.0,
            angular_step: 1.0,
            per_step_time: DEFAULT_STEP_TIME_S,
            window: 80.0,
            z_step: 0.1,
            noise_sigma: 0.3,
        }
    }
}

pub fn sample_profile_line(
    scenario: &PipeScenario,
    pose: &RobotPose,
    theta: f64,
    window: f64,
    step: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<ProfileLine, SensorError> {
    if !(step > 0.0) || !(window >= 0.0) {
        return Err(SensorError::Parameter(
            "profile step must be > 0 and window >= 0".into(),
        ));
    }
    let noise = Noise::new(noise_sigma)?;
    let half = window / 2.0;
    let n = (window / step + 1e-9).floor() as usize + 1;
    let z_first = pose.z - half / 1000.0;
    let z_last = pose.z + (-half + (n - 1) as f64 * step) / 1000.0;
    // fail early if the stripe leaves the pipe
    scenario.surface_radius_at(z_first, theta, false)?;
    scenario.surface_radius_at(z_last, theta, false)?;

    let lined = scenario.is_lined();
    let cast = scenario.inner_radius_cast();
    let mut rng = rng::stream(seed, theta.to_bits());
    let samples = (0..n)
        .map(|k| {
            let z_local = -half + k as f64 * step;
            let truth = match scenario.surface_radius_at(pose.z + z_local / 1000.0, theta, lined)? {
                SurfaceSample::Wall { radius } => Some(radius),
                SurfaceSample::HoleInterior { depth_to_valve } => depth_to_valve.map(|d| cast + d),
            };
            Ok((z_local, truth.map(|r| r + noise.sample(&mut rng))))
        })
        .collect::<Result<Vec<_>, SensorError>>()?;
    Ok(ProfileLine {
        theta,
        samples,
        noise_sigma,
    })
}

/// Sweep the profilometer from the pose roll through `params.sweep` degrees.
pub fn run_profile_scan(
    scenario: &PipeScenario,
    pose: &RobotPose,
    params: &ScanParams,
    seed: u64,
) -> Result<ProfileScan, SensorError> {
    if !(params.angular_step > 0.0) {
        return Err(SensorError::Parameter(
            "angular step must be positive".into(),
        ));
    }
    if params.sweep > ROLL_LIMIT_DEG || params.sweep < 0.0 {
        return Err(SensorError::RotationRange(params.sweep));
    }
    let steps = (params.sweep / params.angular_step).round() as usize;
    let end_roll = pose.roll + steps.saturating_sub(1) as f64 * params.angular_step;
    if !pose.roll_in_range() || end_roll > ROLL_LIMIT_DEG {
        return Err(SensorError::RotationRange(end_roll));
    }
    let lines = (0..steps)
        .map(|k| {
            let theta = pose.roll + k as f64 * params.angular_step;
            sample_profile_line(
                scenario,
                pose,
                theta,
                params.window,
                params.z_step,
                params.noise_sigma,
                rng::derive(seed, k as u64),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProfileScan {
        lines,
        angular_step: params.angular_step,
        duration: steps as f64 * params.per_step_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{build_scenario, templates, BranchConnection, ScenarioConfig};

    fn one_branch(theta: f64) -> PipeScenario {
        let mut cfg: ScenarioConfig = templates::lab8m();
        cfg.branches = vec![BranchConnection {
            axial_pos: 3.0,
            angular_pos: theta,
            hole_diameter: 20.0,
            valve_axis_offset: 0.0,
            valve_depth: 30.0,
            hardware_present: true,
            liner_opening_diameter: None,
        }];
        build_scenario(&cfg).unwrap()
    }

    #[test]
    fn plain_wall_is_exact() {
        let s = one_branch(90.0);
        let line =
            sample_profile_line(&s, &RobotPose::new(1.0, 0.0), 0.0, 40.0, 0.5, 0.0, 1).unwrap();
        assert_eq!(line.samples.len(), 81);
        assert!(line.samples.iter().all(|&(_, r)| r == Some(50.0)));
        assert!(line.samples.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn hole_crossing_sees_valve_face() {
        let s = one_branch(90.0);
        let line =
            sample_profile_line(&s, &RobotPose::new(3.0, 0.0), 90.0, 60.0, 0.5, 0.0, 1).unwrap();
        for &(z, r) in &line.samples {
            let expect = if z.abs() <= 10.0 { 80.0 } else { 50.0 };
            assert_eq!(r, Some(expect), "z_local {z}");
        }
    }

    #[test]
    fn noise_has_configured_sigma() {
        let s = one_branch(90.0);
        let line =
            sample_profile_line(&s, &RobotPose::new(1.0, 0.0), 0.0, 999.9, 0.1, 0.3, 42).unwrap();
        let devs: Vec<f64> = line
            .samples
            .iter()
            .map(|&(_, r)| r.unwrap() - 50.0)
            .collect();
        assert_eq!(devs.len(), 10_000);
        let mean = devs.iter().sum::<f64>() / devs.len() as f64;
        let var = devs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (devs.len() - 1) as f64;
        let sd = var.sqrt();
        assert!((0.27..=0.33).contains(&sd), "sd {sd}");
    }

    #[test]
    fn window_past_pipe_end() {
        let s = one_branch(90.0);
        let r = sample_profile_line(&s, &RobotPose::new(7.99, 0.0), 0.0, 40.0, 0.5, 0.0, 1);
        assert!(matches!(r, Err(SensorError::World(_))));
    }

    #[test]
    fn reproducible_per_seed() {
        let s = one_branch(90.0);
        let pose = RobotPose::new(3.0, 0.0);
        let a = sample_profile_line(&s, &pose, 90.0, 60.0, 0.5, 0.3, 9).unwrap();
        let b = sample_profile_line(&s, &pose, 90.0, 60.0, 0.5, 0.3, 9).unwrap();
        let c = sample_profile_line(&s, &pose, 90.0, 60.0, 0.5, 0.3, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn scan_duration_and_limits() {
        let s = one_branch(90.0);
        let pose = RobotPose::new(3.0, 0.0);
        let params = ScanParams {
            sweep: 360.0,
            window: 4.0,
            z_step: 1.0,
            ..ScanParams::default()
        };
        let full = run_profile_scan(&s, &pose, &params, 1).unwrap();
        assert_eq!(full.lines.len(), 360);
        assert!((full.duration - 600.0).abs() < 1.0);
        assert!(full
            .lines
            .windows(2)
            .all(|w| (w[1].theta - w[0].theta - 1.0).abs() < 1e-12));

        let quarter = run_profile_scan(
            &s,
            &pose,
            &ScanParams {
                sweep: 90.0,
                ..params.clone()
            },
            1,
        )
        .unwrap();
        assert_eq!(quarter.lines.len(), 90);
        assert!((quarter.duration - 150.0).abs() < 0.1);

        let over = run_profile_scan(
            &s,
            &pose,
            &ScanParams {
                sweep: 410.0,
                ..params
            },
            1,
        );
        assert!(matches!(over, Err(SensorError::RotationRange(_))));
    }

    #[test]
    fn lined_scan_has_no_discontinuity() {
        let s = one_branch(90.0).relined(Default::default()).unwrap();
        let params = ScanParams {
            sweep: 120.0,
            window: 40.0,
            z_step: 0.5,
            noise_sigma: 0.0,
            ..ScanParams::default()
        };
        let scan = run_profile_scan(&s, &RobotPose::new(3.0, 30.0), &params, 3).unwrap();
        assert!(scan
            .lines
            .iter()
            .flat_map(|l| &l.samples)
            .all(|&(_, r)| r == Some(40.0)));
    }
}
