use serde::{Deserialize, Serialize};

use super::{fit_circle, Circle, PerceptionError};
use crate::sensors::{ProfileScan, RobotPose};

/// Reconstructed surface points in the module frame, mm.
///
/// `x` points right and `y` up when looking down the pipe from the
/// insertion end; `z` is along the axis relative to the datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
    /// Pose the scan was taken from, as believed by the robot.
    pub pose: RobotPose,
    pub angular_step: f64,
}

impl PointCloud {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// Pipe angle (top = 0°, clockwise) to the planar angle of the module frame.
pub(crate) fn planar_angle(theta_deg: f64) -> f64 {
    (90.0 - theta_deg).to_radians()
}

/// Inverse of [`planar_angle`], wrapped into `[0, 360)`.
pub(crate) fn pipe_angle(x: f64, y: f64) -> f64 {
    crate::geometry::wrap_deg(90.0 - y.atan2(x).to_degrees())
}

pub fn reconstruct_cloud(
    scan: &ProfileScan,
    pose: &RobotPose,
) -> Result<PointCloud, PerceptionError> {
    if scan.lines.is_empty() {
        return Err(PerceptionError::InsufficientData(
            "empty profile scan".into(),
        ));
    }
    let mut points = Vec::with_capacity(scan.lines.iter().map(|l| l.samples.len()).sum());
    for line in &scan.lines {
        let (sin, cos) = planar_angle(line.theta).sin_cos();
        for &(z, range) in &line.samples {
            if let Some(r) = range {
                points.push([r * cos, r * sin, z]);
            }
        }
    }
    Ok(PointCloud {
        points,
        pose: *pose,
        angular_step: scan.angular_step,
    })
}

/// Circle fit of the wall points (within `margin` mm of the median
/// radius) projected along the pipe axis.
pub fn cylinder_residual(cloud: &PointCloud, margin: f64) -> Result<Circle, PerceptionError> {
    let mut radii: Vec<f64> = cloud.points.iter().map(|p| p[0].hypot(p[1])).collect();
    if radii.is_empty() {
        return Err(PerceptionError::InsufficientData("empty cloud".into()));
    }
    radii.sort_by(f64::total_cmp);
    let median = radii[radii.len() / 2];
    let wall: Vec<(f64, f64)> = cloud
        .points
        .iter()
        .filter(|p| (p[0].hypot(p[1]) - median).abs() <= margin)
        .map(|p| (p[0], p[1]))
        .collect();
    fit_circle(&wall)
        .ok_or_else(|| PerceptionError::InsufficientData("wall points do not fit a circle".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationStats {
    pub mean: f64,
    pub max: f64,
    pub count: usize,
}

/// Wall points bordering a missing or deep neighbour along their stripe,
/// expressed in the pipe frame (`z` includes the pose).
fn boundary_points(cloud: &PointCloud, pipe_radius: f64, margin: f64) -> Vec<[f64; 3]> {
    let lines = super::hole::group_lines(cloud, pipe_radius, margin);
    let z0 = cloud.pose.z * 1000.0;
    let mut out = Vec::new();
    for line in &lines {
        let (sin, cos) = planar_angle(line.theta).sin_cos();
        for t in line.transitions() {
            let r = line.samples[t.wall_index].r;
            out.push([r * cos, r * sin, z0 + line.samples[t.wall_index].z]);
        }
    }
    out
}

/// Nearest-neighbour distances between the hole-boundary points of two
/// clouds after placing both in the pipe frame by their poses.
pub fn compare_reconstructions(
    a: &PointCloud,
    b: &PointCloud,
    pipe_radius: f64,
) -> Result<DeviationStats, PerceptionError> {
    if a.is_empty() || b.is_empty() {
        return Err(PerceptionError::InsufficientData("empty cloud".into()));
    }
    let margin = 5.0;
    let pa = boundary_points(a, pipe_radius, margin);
    let pb = boundary_points(b, pipe_radius, margin);
    if pa.is_empty() || pb.is_empty() {
        return Err(PerceptionError::InsufficientData(
            "no hole boundary in one of the clouds".into(),
        ));
    }
    let dists: Vec<f64> = pa
        .iter()
        .map(|p| {
            pb.iter()
                .map(|q| {
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = dists.iter().sum::<f64>() / dists.len() as f64;
    let max = dists.iter().copied().fold(0.0, f64::max);
    Ok(DeviationStats {
        mean,
        max,
        count: dists.len(),
    })
}
