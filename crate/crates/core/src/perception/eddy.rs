use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BranchDetection, DetectionMethod, PerceptionError};
use crate::dsp::{
    self, detect_events, differential, lock_in_demodulate, modulus, moving_average, EventKind,
    IQStream, RealStream,
};
use crate::geometry::wrap_deg;
use crate::rng;
use crate::sensors::{interpolate_pose, synthesize_ec_raw, CoilParams, RobotPose};
use crate::world::PipeScenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AxialLocalizeParams {
    pub ma_window: usize,
    /// Filtered differential modulus needed to open a lobe.
    pub threshold: f64,
    pub hysteresis: f64,
    /// Probe centre relative to the datum, mm.
    pub probe_center_offset: f64,
}

impl Default for AxialLocalizeParams {
    fn default() -> Self {
        AxialLocalizeParams {
            ma_window: dsp::DEFAULT_MA_WINDOW,
            threshold: 0.3,
            hysteresis: 0.06,
            probe_center_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxialLocalization {
    pub detection: BranchDetection,
    /// Zero-crossing time after filter-delay compensation, µs.
    pub crossing_t_us: f64,
    pub peak_modulus: f64,
}

fn mean_spacing_us(t: &[i64]) -> f64 {
    if t.len() < 2 {
        return 0.0;
    }
    (t[t.len() - 1] - t[0]) as f64 / (t.len() - 1) as f64
}

/// Every lobe pair in a differential trace, in time order.
///
/// The filtered modulus opens lobes through the hysteresis detector. The
/// trace is projected on the impedance direction seen at the first lobe
/// peak; the projection changes sign between a lobe and the next lobe of
/// opposite sign, and that crossing, shifted back by the moving-average
/// delay, is mapped to a robot position through the pose track.
pub fn ec_axial_localize_all(
    diff: &IQStream,
    pose_track: &[(i64, RobotPose)],
    params: &AxialLocalizeParams,
) -> Result<Vec<AxialLocalization>, PerceptionError> {
    let w = params.ma_window;
    let filtered = moving_average(&modulus(diff).values, w)?;
    let t: Vec<i64> = diff.samples.iter().map(|s| s.t).collect();
    let events = detect_events(
        &RealStream {
            t: t.clone(),
            values: filtered.clone(),
        },
        params.threshold,
        params.hysteresis,
    )?;
    let peaks: Vec<usize> = events
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Peak)
        .map(|e| e.index)
        .collect();
    let Some(&first) = peaks.first() else {
        return Ok(Vec::new());
    };

    let fi = moving_average(&diff.samples.iter().map(|s| s.i).collect::<Vec<_>>(), w)?;
    let fq = moving_average(&diff.samples.iter().map(|s| s.q).collect::<Vec<_>>(), w)?;
    let dir = Complex64::new(fi[first], fq[first]);
    let dir = dir / dir.norm();
    let projection: Vec<f64> = diff
        .samples
        .iter()
        .map(|s| (s.complex() * dir.conj()).re)
        .collect();
    let proj = moving_average(&projection, w)?;

    let delay = (w - 1) as f64 / 2.0 * mean_spacing_us(&t);
    let mut out = Vec::new();
    let mut k = 0;
    while k + 1 < peaks.len() {
        let (a, b) = (peaks[k], peaks[k + 1]);
        if proj[a].signum() == proj[b].signum() {
            k += 1;
            continue;
        }
        let crossing =
            (a + 1..=b).find(|&n| proj[n].signum() != proj[a].signum() || proj[n] == 0.0);
        let Some(n) = crossing else {
            k += 1;
            continue;
        };
        let frac = proj[n - 1] / (proj[n - 1] - proj[n]);
        let tc = t[n - 1] as f64 + frac * (t[n] - t[n - 1]) as f64 - delay;
        let peak = filtered[a].max(filtered[b]);
        let z = interpolate_pose(pose_track, tc).z + params.probe_center_offset / 1000.0;
        out.push(AxialLocalization {
            detection: BranchDetection {
                axial_pos_est: z,
                angular_pos_est: None,
                method: DetectionMethod::EcAxial,
                confidence: (peak / (2.0 * params.threshold)).min(1.0),
                rear_wall_flag: false,
            },
            crossing_t_us: tc,
            peak_modulus: peak,
        });
        k += 2;
    }
    Ok(out)
}

/// First lobe pair of a differential trace.
pub fn ec_axial_localize(
    diff: &IQStream,
    pose_track: &[(i64, RobotPose)],
    params: &AxialLocalizeParams,
) -> Result<AxialLocalization, PerceptionError> {
    ec_axial_localize_all(diff, pose_track, params)?
        .into_iter()
        .next()
        .ok_or_else(|| {
            PerceptionError::NoDetection("no differential lobe pair above threshold".into())
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    /// Half extent along the axis, mm.
    pub z_half: f64,
    pub z_step: f64,
    /// Half extent around the circumference, degrees.
    pub theta_half: f64,
    pub theta_step: f64,
    /// Lock-in blocks acquired at each node.
    pub burst_blocks: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            z_half: 15.0,
            z_step: 1.0,
            theta_half: 15.0,
            theta_step: 1.0,
            burst_blocks: dsp::DEFAULT_MA_WINDOW,
        }
    }
}

/// Filtered point-coil modulus over a `(z, θ)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    /// Datum positions, metres.
    pub z_axis: Vec<f64>,
    /// Module roll, degrees.
    pub theta_axis: Vec<f64>,
    /// `values[iz][itheta]`
    pub values: Vec<Vec<f64>>,
}

fn axis(centre: f64, half: f64, step: f64) -> Vec<f64> {
    let n = (half / step + 1e-9).floor() as i64;
    (-n..=n).map(|k| centre + k as f64 * step).collect()
}

/// Static burst at `pose`, demodulated.
#[allow(clippy::too_many_arguments)]
fn burst(
    scenario: &PipeScenario,
    pose: RobotPose,
    coil: &CoilParams,
    sample_rate: f64,
    block: usize,
    blocks: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<IQStream, PerceptionError> {
    let span = ((blocks * block) as f64 * 1e6 / sample_rate).round() as i64;
    let track = [(0, pose), (span, pose)];
    let mut raw = synthesize_ec_raw(scenario, &track, coil, sample_rate, seed, noise_sigma)?;
    raw.samples.truncate(blocks * block);
    Ok(lock_in_demodulate(&raw, coil.excitation_freq, block)?)
}

/// Point-coil map around `centre = (z m, θ deg)`.
///
/// Each node is a static burst balanced against a reference taken half a
/// turn away at the same axial position; the node value is the filtered
/// modulus of the difference at the end of the burst.
#[allow(clippy::too_many_arguments)]
pub fn acquire_radial_grid(
    scenario: &PipeScenario,
    centre: (f64, f64),
    spec: &GridSpec,
    coil: &CoilParams,
    sample_rate: f64,
    block: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<ScanGrid, PerceptionError> {
    if !(spec.z_step > 0.0 && spec.theta_step > 0.0) || spec.burst_blocks == 0 {
        return Err(PerceptionError::InsufficientData(
            "grid steps and burst length must be positive".into(),
        ));
    }
    let z_axis: Vec<f64> = axis(centre.0 * 1000.0, spec.z_half, spec.z_step)
        .into_iter()
        .map(|z| z / 1000.0)
        .collect();
    let theta_axis = axis(centre.1, spec.theta_half, spec.theta_step);
    let mut values = Vec::with_capacity(z_axis.len());
    for (iz, &z) in z_axis.iter().enumerate() {
        let ref_pose = RobotPose::new(z, wrap_deg(centre.1 + 180.0));
        let reference = burst(
            scenario,
            ref_pose,
            coil,
            sample_rate,
            block,
            spec.burst_blocks,
            noise_sigma,
            rng::derive(seed, (iz as u64) << 32 | 0xFFFF_FFFF),
        )?;
        let mut row = Vec::with_capacity(theta_axis.len());
        for (it, &theta) in theta_axis.iter().enumerate() {
            let pose = RobotPose::new(z, wrap_deg(theta));
            let node_seed = rng::derive(seed, (iz as u64) << 32 | it as u64);
            let node = burst(
                scenario,
                pose,
                coil,
                sample_rate,
                block,
                spec.burst_blocks,
                noise_sigma,
                node_seed,
            )?;
            let m = modulus(&differential(&node, &reference)?);
            let filtered = moving_average(&m.values, spec.burst_blocks)?;
            row.push(*filtered.last().expect("non-empty burst"));
        }
        values.push(row);
    }
    Ok(ScanGrid {
        z_axis,
        theta_axis,
        values,
    })
}

/// Parabolic refinement along one axis around index `k`.
fn refine_axis(axis: &[f64], value: impl Fn(usize) -> f64, k: usize) -> f64 {
    if k == 0 || k + 1 >= axis.len() {
        return axis[k];
    }
    let refined = dsp::refine_peak([
        (axis[k - 1], value(k - 1)),
        (axis[k], value(k)),
        (axis[k + 1], value(k + 1)),
    ]);
    let step = (axis[k + 1] - axis[k - 1]) / 2.0;
    refined.clamp(axis[k] - step, axis[k] + step)
}

/// Hole centre `(z m, θ deg)` from the grid maximum, refined per axis.
pub fn ec_radial_center(grid: &ScanGrid) -> Result<(f64, f64), PerceptionError> {
    let mut best: Option<(usize, usize, f64)> = None;
    let mut lo = f64::INFINITY;
    for (iz, row) in grid.values.iter().enumerate() {
        for (it, &v) in row.iter().enumerate() {
            lo = lo.min(v);
            if best.is_none_or(|b| v > b.2) {
                best = Some((iz, it, v));
            }
        }
    }
    let Some((iz, it, hi)) = best else {
        return Err(PerceptionError::NoDetection("empty grid".into()));
    };
    if !(hi - lo > 1e-9 * hi.abs().max(1.0)) {
        return Err(PerceptionError::NoDetection("flat grid".into()));
    }
    let z = refine_axis(&grid.z_axis, |k| grid.values[k][it], iz);
    let theta = refine_axis(&grid.theta_axis, |k| grid.values[iz][k], it);
    Ok((z, wrap_deg(theta)))
}
