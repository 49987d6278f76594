//! Shared fixtures for the benchmarks.

use reline_core::dsp::{lock_in_demodulate, IQStream};
use reline_core::perception::{reconstruct_cloud, PointCloud};
use reline_core::sensors::{run_profile_scan, synthesize_ec_raw, RobotPose, ScanParams};
use reline_core::world::{build_scenario, templates, LinerSpec, PipeScenario};

pub fn lab() -> PipeScenario {
    build_scenario(&templates::lab8m()).expect("lab template is valid")
}

pub fn lined_lab() -> PipeScenario {
    lab()
        .relined(LinerSpec::default())
        .expect("default liner fits")
}

/// Default 60° profilometry sweep centred on the first lab branch.
pub fn hole_cloud(seed: u64) -> PointCloud {
    let s = lab();
    let pose = RobotPose::new(s.branches()[0].axial_pos, 330.0);
    let scan =
        run_profile_scan(&s, &pose, &ScanParams::default(), seed).expect("scan fits the pipe");
    reconstruct_cloud(&scan, &pose).expect("non-empty scan")
}

/// Demodulated lead-coil signal of a 0.4 m sweep over a lined branch.
pub fn ec_sweep_iq(seed: u64) -> (IQStream, Vec<(i64, RobotPose)>) {
    let s = lined_lab();
    let sensors = templates::lab8m().sensors;
    let track = vec![
        (0, RobotPose::new(2.8, 0.0)),
        (8_000_000, RobotPose::new(3.2, 0.0)),
    ];
    let (lead, _) = sensors.axial_probe.coils();
    let raw = synthesize_ec_raw(
        &s,
        &track,
        &lead,
        sensors.ec_sample_rate,
        seed,
        sensors.ec_noise_sigma,
    )
    .expect("valid sweep");
    let iq =
        lock_in_demodulate(&raw, lead.excitation_freq, sensors.ec_block).expect("aligned blocks");
    (iq, track)
}
