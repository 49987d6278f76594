//! CSV and PLY writers for traces, clouds, grids and toolpaths.

use std::fmt::Write;

use crate::dsp::{modulus, moving_average, DspError, EventList, IQStream};
use crate::mission::EcTrace;
use crate::motion::Toolpath;
use crate::perception::{PointCloud, ScanGrid};
use crate::sensors::{interpolate_pose, ProfileScan};

/// `t_us,raw,i,q,modulus,z_m,roll_deg,filtered`, one row per lock-in block.
pub fn ec_trace_csv(trace: &EcTrace, window: usize) -> Result<String, DspError> {
    let m = modulus(&trace.iq);
    let filtered = moving_average(&m.values, window)?;
    let mut out = String::from("t_us,raw,i,q,modulus,z_m,roll_deg,filtered\n");
    for (k, s) in trace.iq.samples.iter().enumerate() {
        let pose = interpolate_pose(&trace.pose_track, s.t as f64);
        let raw = trace.raw_center.get(k).copied().unwrap_or(f64::NAN);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.t, raw, s.i, s.q, m.values[k], pose.z, pose.roll, filtered[k]
        );
    }
    Ok(out)
}

/// `t_us,i,q`
pub fn iq_csv(stream: &IQStream) -> String {
    let mut out = String::from("t_us,i,q\n");
    for s in &stream.samples {
        let _ = writeln!(out, "{},{},{}", s.t, s.i, s.q);
    }
    out
}

/// `t_us,kind,value`
pub fn events_csv(events: &EventList) -> String {
    let mut out = String::from("t_us,kind,value\n");
    for e in &events.events {
        let _ = writeln!(out, "{},{},{}", e.t, e.kind.as_str(), e.value);
    }
    out
}

/// `theta_deg,z_mm,range_mm`; missing returns leave the range empty.
pub fn profile_scan_csv(scan: &ProfileScan) -> String {
    let mut out = String::from("theta_deg,z_mm,range_mm\n");
    for line in &scan.lines {
        for (z, r) in &line.samples {
            match r {
                Some(r) => writeln!(out, "{},{z},{r}", line.theta),
                None => writeln!(out, "{},{z},", line.theta),
            }
            .expect("writing to a string");
        }
    }
    out
}

/// ASCII PLY with one vertex per point.
pub fn cloud_ply(cloud: &PointCloud) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ply\nformat ascii 1.0");
    let _ = writeln!(
        out,
        "comment pose_z_m {} roll_deg {}",
        cloud.pose.z, cloud.pose.roll
    );
    let _ = writeln!(out, "element vertex {}", cloud.points.len());
    let _ = writeln!(
        out,
        "property double x\nproperty double y\nproperty double z\nend_header"
    );
    for p in &cloud.points {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    out
}

/// Matrix with θ across and z down; the corner cell is `z_m\theta_deg`.
pub fn grid_csv(grid: &ScanGrid) -> String {
    let mut out = String::from("z_m\\theta_deg");
    for t in &grid.theta_axis {
        let _ = write!(out, ",{t}");
    }
    out.push('\n');
    for (z, row) in grid.z_axis.iter().zip(&grid.values) {
        let _ = write!(out, "{z}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// `kind,x0,y0,z0,x1,y1,z1,feed,rpm,doc`
pub fn toolpath_csv(path: &Toolpath) -> String {
    let mut out = String::from("kind,x0,y0,z0,x1,y1,z1,feed,rpm,doc\n");
    for s in &path.segments {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.kind.as_str(),
            s.start[0],
            s.start[1],
            s.start[2],
            s.end[0],
            s.end[1],
            s.end[2],
            s.feed,
            s.spindle_rpm,
            s.radial_doc
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensors::RobotPose;

    #[test]
    fn ply_header_counts_vertices() {
        let cloud = PointCloud {
            points: vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]],
            pose: RobotPose::default(),
            angular_step: 1.0,
        };
        let ply = cloud_ply(&cloud);
        assert!(ply.contains("element vertex 2"));
        assert_eq!(ply.lines().last(), Some("4 5 6"));
    }

    #[test]
    fn grid_layout() {
        let grid = ScanGrid {
            z_axis: vec![1.0, 1.001],
            theta_axis: vec![10.0, 11.0],
            values: vec![vec![0.0, 1.0], vec![2.0, 3.0]],
        };
        assert_eq!(grid_csv(&grid), "z_m\\theta_deg,10,11\n1,0,1\n1.001,2,3\n");
    }
}
