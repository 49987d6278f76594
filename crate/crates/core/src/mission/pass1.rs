use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    machine_with_retry, nearest_branch, tags, BranchMap, EntryStatus, MachiningRecord, MapEntry,
    MissionConfig, MissionError, MissionLog, MissionState, Pass, PassRecord, Phase, Provenance,
};
use crate::geometry::wrap_deg;
use crate::motion::{plan_bore, rotate_plan, traction_check, Material};
use crate::perception::{
    assess_compliance, collect_front_readings, detect_branches_front, fit_hole, reconstruct_cloud,
    DetectionMethod, HoleCharacterization, PointCloud,
};
use crate::rng::derive;
use crate::sensors::{run_profile_scan, Odometer, OdometryModel, RobotPose, ROLL_LIMIT_DEG};
use crate::world::PipeScenario;

/// Profilometry cloud kept for export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredCloud {
    pub id: String,
    pub cloud: PointCloud,
    pub hole: Option<HoleCharacterization>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pass1Output {
    pub map: BranchMap,
    pub log: MissionLog,
    /// Ground truth after boring.
    pub scenario_after: PipeScenario,
    pub clouds: Vec<StoredCloud>,
}

/// Roll at which a sweep of `sweep` degrees starting near `start` fits the stage.
fn sweep_start(current: f64, start: f64, sweep: f64) -> Result<f64, MissionError> {
    let base = wrap_deg(start);
    [base, base + 360.0]
        .into_iter()
        .filter(|r| r + sweep <= ROLL_LIMIT_DEG)
        .min_by(|a, b| (a - current).abs().total_cmp(&(b - current).abs()))
        .ok_or_else(|| {
            MissionError::Precondition(format!("a {sweep}° sweep does not fit the rotation range"))
        })
}

/// Pass 1 over a bare cast-iron pipe.
///
/// The front laser runs over the whole pipe with odometry. Each detected
/// branch is then visited in order: the robot moves to the estimated
/// centre, sweeps the profilometer across it, fits the hole and, when the
/// branch is compliant, bores it to the configured diameter.
pub fn run_pass1(
    scenario: &PipeScenario,
    config: &MissionConfig,
) -> Result<Pass1Output, MissionError> {
    if scenario.is_lined() {
        return Err(MissionError::Precondition(
            "pass 1 needs an unlined pipe".into(),
        ));
    }
    let seed = config.seed;
    let sensors = &config.sensors;
    let mut state = MissionState::new(Pass::Pass1CastIron);
    let mut log = MissionLog::default();
    let mut map = BranchMap::new(scenario.pipe_id());
    let mut current = scenario.clone();
    let mut clouds = Vec::new();

    log.push(
        0,
        Phase::Traverse,
        "pass_start",
        json!({"pass": 1, "seed": seed, "pipe_id": scenario.pipe_id()}),
    );
    if !traction_check(config.traverse_speed, config.drag_force)? {
        return Err(MissionError::Abort(format!(
            "{} N of traction not available at {} m/s",
            config.drag_force, config.traverse_speed
        )));
    }

    let lookahead = sensors.front_laser.lookahead / 1000.0;
    let end = scenario.length() - lookahead;
    let mut odometer = Odometer::new(&OdometryModel {
        seed: derive(seed, tags::ODOMETRY),
        ..sensors.odometry.clone()
    })?;
    let readings = if end > 0.0 {
        collect_front_readings(
            scenario,
            0.0,
            end,
            &sensors.front_laser,
            sensors.front_laser_noise_sigma,
            sensors.reading_step_mm,
            &mut odometer,
            derive(seed, tags::LASER),
        )?
    } else {
        Vec::new()
    };
    let detections = detect_branches_front(&readings, &config.front);
    // believed position to true position, ignoring the per-reading jitter
    let scale = odometer.scale();
    let to_true = |belief: f64| belief / scale;

    for (k, det) in detections.iter().enumerate() {
        let id = format!("B{:02}", k + 1);
        // the detection closes when the laser ring leaves the rear wall
        let trigger = (to_true(det.axial_pos_est) - lookahead).clamp(0.0, scenario.length());
        state.advance_clock((trigger - state.pose.z).abs() / config.traverse_speed);
        state.pose.z = trigger;
        let t_detect = state.clock_us;
        log.push(
            t_detect,
            Phase::Traverse,
            "front_detection",
            json!({
                "id": id,
                "axial_pos_est": det.axial_pos_est,
                "angular_pos_est": det.angular_pos_est,
                "confidence": det.confidence,
                "rear_wall": det.rear_wall_flag,
            }),
        );
        let mut entry = MapEntry {
            id: id.clone(),
            axial_pos_est: det.axial_pos_est,
            angular_pos_est: det.angular_pos_est,
            diameter_est: None,
            valve_axis_offset_est: None,
            compliance: None,
            status: EntryStatus::Detected,
            provenance: vec![Provenance {
                pass: 1,
                method: DetectionMethod::FrontLaser,
                timestamp_us: t_detect,
                axial_pos_est: det.axial_pos_est,
                angular_pos_est: det.angular_pos_est,
            }],
            machining: Vec::new(),
            notes: Vec::new(),
        };

        state.enter(Phase::Characterize)?;
        let believed = det.axial_pos_est - config.rear_wall_correction / 1000.0;
        let z_true = to_true(believed);
        state.advance_clock((z_true - state.pose.z).abs() / config.traverse_speed);
        state.pose.z = z_true;
        let sweep = sensors.profile.sweep;
        let theta = det.angular_pos_est.unwrap_or(0.0);
        let start = sweep_start(state.pose.roll, theta - sweep / 2.0, sweep)?;
        let rotation = rotate_plan(state.pose.roll, start)?;
        state.advance_clock(rotation.travel.abs() / config.roll_speed);
        state.pose.roll = start;
        log.push(
            state.clock_us,
            Phase::Characterize,
            "rotate",
            json!({"id": id, "from": rotation.from, "to": rotation.to}),
        );

        let scan_pose = RobotPose::new(z_true, start);
        let scan = match run_profile_scan(
            &current,
            &scan_pose,
            &sensors.profile,
            derive(seed, tags::SCAN + k as u64),
        ) {
            Ok(scan) => scan,
            Err(e) => {
                log.push(
                    state.clock_us,
                    Phase::Characterize,
                    "characterization_failed",
                    json!({"id": id, "error": e.to_string()}),
                );
                entry.status = EntryStatus::CharacterizationFailed;
                entry.notes.push(e.to_string());
                map.entries.push(entry);
                state.enter(Phase::Traverse)?;
                continue;
            }
        };
        state.advance_clock(scan.duration);
        state.pose.roll = start + sweep;
        let cloud = reconstruct_cloud(&scan, &RobotPose::new(believed, start))?;
        let fit = fit_hole(&cloud, current.inner_radius_cast(), &config.hole_fit);
        clouds.push(StoredCloud {
            id: id.clone(),
            cloud,
            hole: fit.as_ref().ok().copied(),
        });
        let hole = match fit {
            Ok(h) => h,
            Err(e) => {
                log.push(
                    state.clock_us,
                    Phase::Characterize,
                    "characterization_failed",
                    json!({"id": id, "error": e.to_string()}),
                );
                entry.status = EntryStatus::CharacterizationFailed;
                entry.notes.push(e.to_string());
                map.entries.push(entry);
                state.enter(Phase::Traverse)?;
                continue;
            }
        };
        let report = assess_compliance(&hole, &config.compliance);
        entry.axial_pos_est = hole.center_z;
        entry.angular_pos_est = Some(hole.center_theta);
        entry.diameter_est = Some(hole.diameter_est);
        entry.valve_axis_offset_est = Some(hole.valve_axis_offset_est);
        entry.compliance = Some(report);
        entry.provenance.push(Provenance {
            pass: 1,
            method: DetectionMethod::Profilometry,
            timestamp_us: state.clock_us,
            axial_pos_est: hole.center_z,
            angular_pos_est: Some(hole.center_theta),
        });
        log.push(
            state.clock_us,
            Phase::Characterize,
            "hole_characterized",
            json!({
                "id": id,
                "center_z": hole.center_z,
                "center_theta": hole.center_theta,
                "diameter_est": hole.diameter_est,
                "valve_axis_offset_est": hole.valve_axis_offset_est,
                "rms_residual": hole.rms_residual,
                "compliant": report.compliant,
                "reason": report.reason,
                "scan_duration_s": scan.duration,
            }),
        );
        if !report.compliant {
            entry.status = EntryStatus::NonCompliant;
            map.entries.push(entry);
            state.enter(Phase::Traverse)?;
            continue;
        }

        state.enter(Phase::Machine)?;
        let target = config.machining.bore_target_diameter;
        let tool_z = z_true + (hole.center_z - believed);
        let Some(branch) = nearest_branch(&current, tool_z, hole.diameter_est / 2.0 + 5.0) else {
            log.push(
                state.clock_us,
                Phase::Machine,
                "machining_failed",
                json!({"id": id, "error": "no branch under the tool"}),
            );
            entry.status = EntryStatus::MachiningFailed;
            entry.notes.push("no branch under the tool".into());
            map.entries.push(entry);
            state.enter(Phase::Traverse)?;
            continue;
        };
        let initial = hole.diameter_est.min(target);
        let machined = machine_with_retry(
            &current,
            branch,
            config.machining.cast_iron.rpm,
            config,
            derive(seed, tags::MACHINE + k as u64),
            |rpm| {
                let mut defaults = config.machining.clone();
                defaults.cast_iron.rpm = rpm;
                plan_bore(initial, target, Material::CastIron, &defaults)
            },
        );
        match machined {
            Ok(m) => {
                state.advance_clock(m.outcome.duration);
                log.push(
                    state.clock_us,
                    Phase::Machine,
                    "bore_complete",
                    json!({
                        "id": id,
                        "passes": m.path.passes(),
                        "planned_duration_s": m.path.predicted_duration,
                        "duration_s": m.outcome.duration,
                        "final_diameter": m.outcome.final_diameter,
                        "max_force_per_screw": m.outcome.max_radial_force_per_screw,
                        "rpm": m.rpm,
                        "jams": m.jams,
                    }),
                );
                entry.machining.push(MachiningRecord {
                    pass: 1,
                    material: Material::CastIron,
                    operation: "bore".into(),
                    rpm: m.rpm,
                    planned_duration_s: m.path.predicted_duration,
                    duration_s: m.outcome.duration,
                    final_diameter: m.outcome.final_diameter,
                    jam_occurred: m.jams > 0,
                });
                entry.status = EntryStatus::Bored;
                current = m.scenario;
            }
            Err(e) => {
                log.push(
                    state.clock_us,
                    Phase::Machine,
                    "machining_failed",
                    json!({"id": id, "error": e.to_string()}),
                );
                entry.status = EntryStatus::MachiningFailed;
                entry.notes.push(e.to_string());
            }
        }
        map.entries.push(entry);
        state.enter(Phase::Traverse)?;
    }

    state.enter(Phase::Done)?;
    log.push(
        state.clock_us,
        Phase::Done,
        "pass_end",
        json!({"pass": 1, "entries": map.entries.len()}),
    );
    map.sort_entries();
    map.pass_history.push(PassRecord {
        pass: 1,
        seed,
        duration_s: state.clock_us as f64 / 1e6,
        entries: map.entries.len(),
    });
    map.validate()?;
    Ok(Pass1Output {
        map,
        log,
        scenario_after: current,
        clouds,
    })
}
