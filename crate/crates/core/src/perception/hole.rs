use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::profilometry::pipe_angle;
use super::{fit_circle, PerceptionError, PointCloud};
use crate::geometry::{angle_diff_deg, wrap_deg};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleCharacterization {
    /// Hole centre along the pipe, metres (odometry frame of the scan pose).
    pub center_z: f64,
    /// Hole centre angle, degrees.
    pub center_theta: f64,
    pub diameter_est: f64,
    pub valve_axis_offset_est: f64,
    /// False when no valve face was seen through the hole.
    pub valve_visible: bool,
    pub rms_residual: f64,
    pub boundary_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoleFitParams {
    /// Radial excess over the bore marking a sample as inside the hole, mm.
    pub depth_margin: f64,
    /// Largest acceptable RMS distance of boundary points to the circle, mm.
    pub max_rms: f64,
}

impl Default for HoleFitParams {
    fn default() -> Self {
        HoleFitParams {
            depth_margin: 5.0,
            max_rms: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StripeSample {
    pub z: f64,
    pub r: f64,
}

/// Points of one laser stripe, sorted along the axis.
pub(crate) struct Stripe {
    pub theta: f64,
    pub samples: Vec<StripeSample>,
    step: f64,
    wall_limit: f64,
}

pub(crate) struct Transition {
    pub boundary_z: f64,
    pub wall_index: usize,
}

impl Stripe {
    fn is_wall(&self, i: usize) -> bool {
        self.samples[i].r < self.wall_limit
    }

    /// Wall/hole boundaries along the stripe. Missing samples count as hole.
    pub fn transitions(&self) -> Vec<Transition> {
        let mut out = Vec::new();
        let half = self.step / 2.0;
        for i in 0..self.samples.len().saturating_sub(1) {
            let (a, b) = (&self.samples[i], &self.samples[i + 1]);
            let gap = b.z - a.z > 1.5 * self.step;
            match (self.is_wall(i), self.is_wall(i + 1)) {
                (true, true) if gap => {
                    out.push(Transition {
                        boundary_z: a.z + half,
                        wall_index: i,
                    });
                    out.push(Transition {
                        boundary_z: b.z - half,
                        wall_index: i + 1,
                    });
                }
                (true, false) => out.push(Transition {
                    boundary_z: a.z + half,
                    wall_index: i,
                }),
                (false, true) => out.push(Transition {
                    boundary_z: b.z - half,
                    wall_index: i + 1,
                }),
                _ => {}
            }
        }
        out
    }
}

/// Split a cloud back into its stripes.
pub(crate) fn group_lines(cloud: &PointCloud, pipe_radius: f64, margin: f64) -> Vec<Stripe> {
    let mut groups: BTreeMap<i64, Vec<StripeSample>> = BTreeMap::new();
    for p in &cloud.points {
        let theta = pipe_angle(p[0], p[1]);
        let key = (theta * 1e6).round() as i64;
        groups.entry(key).or_default().push(StripeSample {
            z: p[2],
            r: p[0].hypot(p[1]),
        });
    }
    let mut gaps = Vec::new();
    for samples in groups.values_mut() {
        samples.sort_by(|a, b| a.z.total_cmp(&b.z));
        gaps.extend(
            samples
                .windows(2)
                .map(|w| w[1].z - w[0].z)
                .filter(|g| *g > 1e-9),
        );
    }
    gaps.sort_by(f64::total_cmp);
    let step = gaps.first().copied().unwrap_or(1.0);
    groups
        .into_iter()
        .map(|(key, samples)| Stripe {
            theta: key as f64 / 1e6,
            samples,
            step,
            wall_limit: pipe_radius + margin,
        })
        .collect()
}

/// Locate and size a branch hole from a profilometry cloud.
///
/// Boundary points between wall and hole samples are unrolled onto the
/// `(z, R·θ)` plane and fitted with a circle. The valve face seen through
/// the hole is a disc of the hole's diameter; its overlap with the hole is
/// a lens whose centroid sits halfway along the valve offset, so the offset
/// estimate is twice the centroid displacement.
pub fn fit_hole(
    cloud: &PointCloud,
    pipe_radius: f64,
    params: &HoleFitParams,
) -> Result<HoleCharacterization, PerceptionError> {
    let stripes = group_lines(cloud, pipe_radius, params.depth_margin);
    let mut boundary: Vec<(f64, f64)> = Vec::new();
    let mut deep: Vec<(f64, f64)> = Vec::new();
    for stripe in &stripes {
        boundary.extend(
            stripe
                .transitions()
                .iter()
                .map(|t| (stripe.theta, t.boundary_z)),
        );
        deep.extend(
            stripe
                .samples
                .iter()
                .filter(|s| s.r >= pipe_radius + params.depth_margin)
                .map(|s| (stripe.theta, s.z)),
        );
    }
    if boundary.len() < 5 {
        return Err(PerceptionError::NoHole);
    }
    let (c, s) = boundary.iter().fold((0.0, 0.0), |acc, (t, _)| {
        (acc.0 + t.to_radians().cos(), acc.1 + t.to_radians().sin())
    });
    let theta_ref = s.atan2(c).to_degrees();
    let unroll = |theta: f64| pipe_radius * angle_diff_deg(theta, theta_ref).to_radians();

    let plane: Vec<(f64, f64)> = boundary.iter().map(|&(t, z)| (z, unroll(t))).collect();
    let circle = fit_circle(&plane).ok_or(PerceptionError::NoHole)?;
    if circle.rms > params.max_rms {
        return Err(PerceptionError::PoorFit {
            rms: circle.rms,
            bound: params.max_rms,
        });
    }

    let (offset, visible) = if deep.is_empty() {
        (0.0, false)
    } else {
        let n = deep.len() as f64;
        let mz = deep.iter().map(|d| d.1).sum::<f64>() / n;
        let ms = deep.iter().map(|d| unroll(d.0)).sum::<f64>() / n;
        (2.0 * (mz - circle.cx).hypot(ms - circle.cy), true)
    };

    Ok(HoleCharacterization {
        center_z: cloud.pose.z + circle.cx / 1000.0,
        center_theta: wrap_deg(theta_ref + (circle.cy / pipe_radius).to_degrees()),
        diameter_est: 2.0 * circle.radius,
        valve_axis_offset_est: offset,
        valve_visible: visible,
        rms_residual: circle.rms,
        boundary_points: plane.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComplianceLimits {
    /// mm
    pub max_offset: f64,
    pub diameter_min: f64,
    pub diameter_max: f64,
}

impl Default for ComplianceLimits {
    fn default() -> Self {
        ComplianceLimits {
            max_offset: 5.0,
            diameter_min: 15.0,
            diameter_max: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplianceReason {
    Ok,
    AxisOffsetExceeds,
    DiameterOutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub compliant: bool,
    pub reason: ComplianceReason,
}

pub fn assess_compliance(
    hole: &HoleCharacterization,
    limits: &ComplianceLimits,
) -> ComplianceReport {
    let reason = if hole.valve_axis_offset_est > limits.max_offset {
        ComplianceReason::AxisOffsetExceeds
    } else if !(limits.diameter_min..=limits.diameter_max).contains(&hole.diameter_est) {
        ComplianceReason::DiameterOutOfRange
    } else {
        ComplianceReason::Ok
    };
    ComplianceReport {
        compliant: reason == ComplianceReason::Ok,
        reason,
    }
}
