use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    machine_with_retry, nearest_branch, tags, BranchMap, EntryStatus, MachiningRecord,
    MissionConfig, MissionError, MissionLog, MissionState, Pass, PassRecord, Phase, Provenance,
};
use crate::dsp::{differential, lock_in_demodulate, IQStream};
use crate::geometry::angle_diff_deg;
use crate::motion::{plan_pe_drill, traction_check, Material, MotionError, Toolpath};
use crate::perception::{
    acquire_radial_grid, ec_axial_localize_all, ec_radial_center, DetectionMethod, PerceptionError,
    ScanGrid,
};
use crate::rng::derive;
use crate::sensors::{synthesize_ec_raw, PoseTrack, RobotPose};
use crate::world::PipeScenario;

/// Differential axial-probe trace of one relocation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcTrace {
    pub id: String,
    pub sample_rate: f64,
    /// Lock-in output of `lead - trail`.
    pub iq: IQStream,
    /// Raw differential voltage at the centre sample of each block.
    pub raw_center: Vec<f64>,
    pub pose_track: PoseTrack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredGrid {
    pub id: String,
    pub grid: ScanGrid,
    /// `(z m, θ deg)`
    pub center: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pass2Output {
    pub map: BranchMap,
    pub log: MissionLog,
    pub scenario_after: PipeScenario,
    pub traces: Vec<EcTrace>,
    pub grids: Vec<StoredGrid>,
}

/// Sweep the axial probe over `[from, to]` starting at `t0`.
#[allow(clippy::too_many_arguments)]
fn ec_sweep(
    scenario: &PipeScenario,
    config: &MissionConfig,
    id: &str,
    from: f64,
    to: f64,
    roll: f64,
    t0: i64,
    seed: u64,
) -> Result<EcTrace, MissionError> {
    let s = &config.sensors;
    let duration = ((to - from).abs() / config.ec_speed * 1e6).round() as i64;
    let track = vec![
        (t0, RobotPose::new(from, roll)),
        (t0 + duration.max(1), RobotPose::new(to, roll)),
    ];
    let (lead, trail) = s.axial_probe.coils();
    let raw_a = synthesize_ec_raw(
        scenario,
        &track,
        &lead,
        s.ec_sample_rate,
        derive(seed, tags::EC_LEAD),
        s.ec_noise_sigma,
    )?;
    let raw_b = synthesize_ec_raw(
        scenario,
        &track,
        &trail,
        s.ec_sample_rate,
        derive(seed, tags::EC_TRAIL),
        s.ec_noise_sigma,
    )?;
    let a = lock_in_demodulate(&raw_a, lead.excitation_freq, s.ec_block)
        .map_err(PerceptionError::from)?;
    let b = lock_in_demodulate(&raw_b, trail.excitation_freq, s.ec_block)
        .map_err(PerceptionError::from)?;
    let iq = differential(&a, &b).map_err(PerceptionError::from)?;
    let raw_center = (0..iq.samples.len())
        .map(|k| {
            let n = k * s.ec_block + s.ec_block / 2;
            raw_a.samples[n] - raw_b.samples[n]
        })
        .collect();
    Ok(EcTrace {
        id: id.to_string(),
        sample_rate: s.ec_sample_rate,
        iq,
        raw_center,
        pose_track: track,
    })
}

/// Pass 2 through the liner.
///
/// Every bored branch of the pass-1 map is searched for within the
/// configured window with the differential axial probe. The lobe pair
/// nearest the mapped position gives the axial stop; a point-coil grid
/// then centres the drill, which plunges through the liner and reams it
/// to the target diameter.
pub fn run_pass2(
    scenario: &PipeScenario,
    map: &BranchMap,
    config: &MissionConfig,
) -> Result<Pass2Output, MissionError> {
    if !scenario.is_lined() {
        return Err(MissionError::Precondition(
            "pass 2 needs a lined pipe".into(),
        ));
    }
    if map.pipe_id != scenario.pipe_id() {
        return Err(MissionError::Precondition(format!(
            "map is for pipe {:?}, scenario is {:?}",
            map.pipe_id,
            scenario.pipe_id()
        )));
    }
    map.validate()?;
    let seed = config.seed;
    let sensors = &config.sensors;
    let mut state = MissionState::new(Pass::Pass2Lined);
    let mut log = MissionLog::default();
    let mut out_map = map.clone();
    let mut current = scenario.clone();
    let mut traces = Vec::new();
    let mut grids = Vec::new();

    log.push(
        0,
        Phase::Traverse,
        "pass_start",
        json!({"pass": 2, "seed": seed, "pipe_id": scenario.pipe_id()}),
    );
    for speed in [config.traverse_speed, config.ec_speed] {
        if !traction_check(speed, config.drag_force)? {
            return Err(MissionError::Abort(format!(
                "{} N of traction not available at {speed} m/s",
                config.drag_force
            )));
        }
    }
    let probe_offset = sensors.axial_probe.center_offset / 1000.0;
    let mut axial = config.axial.clone();
    axial.probe_center_offset = sensors.axial_probe.center_offset;

    for (k, entry) in out_map.entries.iter_mut().enumerate() {
        let id = entry.id.clone();
        if entry.status != EntryStatus::Bored {
            log.push(
                state.clock_us,
                Phase::Traverse,
                "skip",
                json!({"id": id, "status": entry.status}),
            );
            continue;
        }
        let mapped = entry.axial_pos_est;
        let roll = state.pose.roll;
        // datum positions that sweep the probe centre over the window
        let from = (mapped - config.search_window - probe_offset).clamp(0.0, scenario.length());
        let to = (mapped + config.search_window - probe_offset).clamp(0.0, scenario.length());
        state.advance_clock((from - state.pose.z).abs() / config.traverse_speed);
        state.pose.z = from;
        let trace = ec_sweep(
            &current,
            config,
            &id,
            from,
            to,
            roll,
            state.clock_us,
            derive(seed, tags::EC_LEAD + k as u64),
        )?;
        state.advance_clock((to - from).abs() / config.ec_speed);
        state.pose.z = to;
        let located = ec_axial_localize_all(&trace.iq, &trace.pose_track, &axial)?
            .into_iter()
            .min_by(|a, b| {
                (a.detection.axial_pos_est - mapped)
                    .abs()
                    .total_cmp(&(b.detection.axial_pos_est - mapped).abs())
            });
        traces.push(trace);
        let Some(located) = located else {
            log.push(
                state.clock_us,
                Phase::Traverse,
                "relocation_failed",
                json!({"id": id, "error": "no eddy-current detection in the search window"}),
            );
            entry.status = EntryStatus::RelocationFailed;
            entry
                .notes
                .push("no eddy-current detection in the search window".into());
            continue;
        };
        let z_ec = located.detection.axial_pos_est;
        entry.provenance.push(Provenance {
            pass: 2,
            method: DetectionMethod::EcAxial,
            timestamp_us: located.crossing_t_us.round() as i64,
            axial_pos_est: z_ec,
            angular_pos_est: None,
        });
        log.push(
            state.clock_us,
            Phase::Traverse,
            "ec_axial_detection",
            json!({"id": id, "axial_pos_est": z_ec, "peak_modulus": located.peak_modulus, "mapped": mapped}),
        );

        state.enter(Phase::Relocate)?;
        state.advance_clock((z_ec - state.pose.z).abs() / config.traverse_speed);
        state.pose.z = z_ec;
        let theta_map = entry.angular_pos_est.unwrap_or(0.0);
        let grid = acquire_radial_grid(
            &current,
            (z_ec, theta_map),
            &config.grid,
            &sensors.radial_coil,
            sensors.ec_sample_rate,
            sensors.ec_block,
            sensors.ec_noise_sigma,
            derive(seed, tags::GRID + k as u64),
        )?;
        let nodes = grid.z_axis.len() * (grid.theta_axis.len() + 1);
        state.advance_clock(
            nodes as f64 * (config.grid.burst_blocks * sensors.ec_block) as f64
                / sensors.ec_sample_rate,
        );
        let center = ec_radial_center(&grid);
        grids.push(StoredGrid {
            id: id.clone(),
            grid,
            center: center.as_ref().ok().copied(),
        });
        let (cz, ctheta) = match center {
            Ok(c) => c,
            Err(e) => {
                log.push(
                    state.clock_us,
                    Phase::Relocate,
                    "relocation_failed",
                    json!({"id": id, "error": e.to_string()}),
                );
                entry.status = EntryStatus::RelocationFailed;
                entry.notes.push(e.to_string());
                state.enter(Phase::Traverse)?;
                continue;
            }
        };
        state.pose.z = cz;
        entry.provenance.push(Provenance {
            pass: 2,
            method: DetectionMethod::EcRadial,
            timestamp_us: state.clock_us,
            axial_pos_est: cz,
            angular_pos_est: Some(ctheta),
        });
        entry.axial_pos_est = cz;
        entry.angular_pos_est = Some(ctheta);
        let truth = nearest_branch(&current, cz, f64::INFINITY).map(|i| &current.branches()[i]);
        let (axial_error, angular_error) = truth.map_or((None, None), |b| {
            (
                Some((cz - b.axial_pos) * 1000.0),
                Some(angle_diff_deg(ctheta, b.angular_pos)),
            )
        });
        log.push(
            state.clock_us,
            Phase::Relocate,
            "relocation",
            json!({
                "id": id,
                "ec_axial_z": z_ec,
                "center_z": cz,
                "center_theta": ctheta,
                "axial_error_mm": axial_error,
                "angular_error_deg": angular_error,
                "within_tolerance": axial_error.is_some_and(|e| e.abs() <= config.relocation_tolerance_mm),
            }),
        );

        state.enter(Phase::Machine)?;
        let Some(branch) = nearest_branch(
            &current,
            cz,
            current
                .branches()
                .iter()
                .map(|b| b.hole_radius())
                .fold(0.0, f64::max),
        ) else {
            log.push(
                state.clock_us,
                Phase::Machine,
                "machining_failed",
                json!({"id": id, "error": "no branch under the tool"}),
            );
            entry.status = EntryStatus::MachiningFailed;
            state.enter(Phase::Traverse)?;
            continue;
        };
        let target = config.machining.liner_target_diameter;
        let cutter = config.machining.pe_cutter.clone();
        let machine_seed = derive(seed, tags::MACHINE + k as u64);
        let drill = machine_with_retry(
            &current,
            branch,
            config.machining.pe_rpm,
            config,
            machine_seed,
            |rpm| plan_pe_drill(target, &cutter, rpm, &config.machining).map(|p| p.drill),
        );
        let drilled = drill.and_then(|d| {
            let rpm = d.rpm;
            let ream = plan_pe_drill(target, &cutter, rpm, &config.machining)?.ream;
            let reamed = match ream {
                Some(path) => Some(machine_with_retry(
                    &d.scenario,
                    branch,
                    rpm,
                    config,
                    derive(machine_seed, 0xEA),
                    |_| Ok::<Toolpath, MotionError>(path.clone()),
                )?),
                None => None,
            };
            Ok((d, reamed))
        });
        match drilled {
            Ok((d, reamed)) => {
                let mut records = vec![("drill", &d)];
                if let Some(r) = &reamed {
                    records.push(("ream", r));
                }
                for (operation, m) in records {
                    state.advance_clock(m.outcome.duration);
                    log.push(
                        state.clock_us,
                        Phase::Machine,
                        &format!("{operation}_complete"),
                        json!({
                            "id": id,
                            "planned_duration_s": m.path.predicted_duration,
                            "duration_s": m.outcome.duration,
                            "final_diameter": m.outcome.final_diameter,
                            "rpm": m.rpm,
                            "jam_risk": m.path.jam_risk,
                            "jams": m.jams,
                        }),
                    );
                    entry.machining.push(MachiningRecord {
                        pass: 2,
                        material: Material::Hdpe,
                        operation: operation.into(),
                        rpm: m.rpm,
                        planned_duration_s: m.path.predicted_duration,
                        duration_s: m.outcome.duration,
                        final_diameter: m.outcome.final_diameter,
                        jam_occurred: m.jams > 0,
                    });
                }
                current = reamed.map_or(d.scenario, |r| r.scenario);
                entry.status = EntryStatus::Drilled;
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
        state.enter(Phase::Traverse)?;
    }

    state.enter(Phase::Done)?;
    log.push(
        state.clock_us,
        Phase::Done,
        "pass_end",
        json!({"pass": 2, "entries": out_map.entries.len()}),
    );
    out_map.sort_entries();
    out_map.pass_history.push(PassRecord {
        pass: 2,
        seed,
        duration_s: state.clock_us as f64 / 1e6,
        entries: out_map.entries.len(),
    });
    out_map.validate()?;
    Ok(Pass2Output {
        map: out_map,
        log,
        scenario_after: current,
        traces,
        grids,
    })
}
