use std::collections::BTreeMap;
use std::fmt::Write;

use super::{BranchMap, MapEntry, MissionLog};
use crate::perception::DetectionMethod;
use crate::world::PipeScenario;

/// Reference durations in minutes: cast-iron bore, liner drill, liner ream.
pub const REFERENCE_MINUTES: [(&str, f64); 3] = [("bore", 30.0), ("drill", 9.0), ("ream", 4.0)];

#[derive(Debug, Clone, PartialEq)]
pub struct MissionReport {
    pub text: String,
    /// `pair,true_m,est_m,error_mm,error_pct`
    pub distances_csv: String,
    /// `id,operation,rpm,duration_min,reference_min,ratio`
    pub machining_csv: String,
}

/// First-pass axial estimate used for inter-branch distances.
fn pass1_estimate(entry: &MapEntry) -> f64 {
    entry
        .provenance
        .iter()
        .find(|p| p.pass == 1 && p.method == DetectionMethod::FrontLaser)
        .or_else(|| entry.provenance.iter().find(|p| p.pass == 1))
        .map_or(entry.axial_pos_est, |p| p.axial_pos_est)
}

fn nearest_truth(truth: &PipeScenario, z: f64) -> Option<f64> {
    truth
        .branches()
        .iter()
        .map(|b| b.axial_pos)
        .min_by(|a, b| (a - z).abs().total_cmp(&(b - z).abs()))
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$}"))
}

/// Text summary plus CSV tables for a set of pass logs and the final map.
///
/// With a ground-truth scenario the per-branch table carries position
/// errors and the distance table compares the first-pass spacings with
/// the true ones.
pub fn mission_report(
    logs: &[MissionLog],
    map: &BranchMap,
    truth: Option<&PipeScenario>,
) -> MissionReport {
    let mut text = String::new();
    let _ = writeln!(text, "Mission report: pipe {}", map.pipe_id);
    let _ = writeln!(text, "Passes: {}", map.pass_history.len());
    for p in &map.pass_history {
        let _ = writeln!(
            text,
            "  pass {} seed {} duration {:.1} s entries {}",
            p.pass, p.seed, p.duration_s, p.entries
        );
    }

    let _ = writeln!(text, "\nBranches ({} entries)", map.entries.len());
    let _ = writeln!(
        text,
        "{:<5} {:>10} {:>9} {:>8} {:>8} {:<22} {:>10}",
        "id", "z_est_m", "theta", "diam_mm", "off_mm", "status", "z_err_mm"
    );
    for e in &map.entries {
        let err = truth
            .and_then(|t| nearest_truth(t, e.axial_pos_est))
            .map(|z| (e.axial_pos_est - z) * 1000.0);
        let _ = writeln!(
            text,
            "{:<5} {:>10.4} {:>9} {:>8} {:>8} {:<22} {:>10}",
            e.id,
            e.axial_pos_est,
            fmt_opt(e.angular_pos_est, 2),
            fmt_opt(e.diameter_est, 2),
            fmt_opt(e.valve_axis_offset_est, 2),
            e.status.as_str(),
            fmt_opt(err, 2),
        );
    }

    let mut distances_csv = String::from("pair,true_m,est_m,error_mm,error_pct\n");
    let _ = writeln!(text, "\nInter-branch distances");
    let _ = writeln!(
        text,
        "{:<9} {:>8} {:>8} {:>9} {:>8}",
        "pair", "true_m", "est_m", "err_mm", "err_pct"
    );
    for w in map.entries.windows(2) {
        let (a, b) = (pass1_estimate(&w[0]), pass1_estimate(&w[1]));
        let est = b - a;
        let true_d = truth.and_then(|t| Some(nearest_truth(t, b)? - nearest_truth(t, a)?));
        let err = true_d.map(|d| (est - d) * 1000.0);
        let pct = true_d
            .zip(err)
            .filter(|(d, _)| d.abs() > 0.0)
            .map(|(d, e)| e.abs() / (d * 1000.0) * 100.0);
        let pair = format!("{}-{}", w[0].id, w[1].id);
        let _ = writeln!(
            text,
            "{:<9} {:>8} {:>8.4} {:>9} {:>8}",
            pair,
            fmt_opt(true_d, 4),
            est,
            fmt_opt(err, 2),
            fmt_opt(pct, 2)
        );
        let _ = writeln!(
            distances_csv,
            "{pair},{},{est:.6},{},{}",
            fmt_opt(true_d, 6),
            fmt_opt(err, 3),
            fmt_opt(pct, 3)
        );
    }

    let mut machining_csv = String::from("id,operation,rpm,duration_min,reference_min,ratio\n");
    let _ = writeln!(text, "\nMachining durations");
    let mut any = false;
    for e in &map.entries {
        for m in &e.machining {
            any = true;
            let minutes = m.duration_s / 60.0;
            let reference = REFERENCE_MINUTES
                .iter()
                .find(|(op, _)| *op == m.operation)
                .map(|r| r.1);
            let ratio = reference.map(|r| minutes / r);
            let _ = writeln!(
                text,
                "  {} {:<5} {:>6.0} rpm {:>6.2} min (reference {} min, ratio {})",
                e.id,
                m.operation,
                m.rpm,
                minutes,
                fmt_opt(reference, 0),
                fmt_opt(ratio, 2)
            );
            let _ = writeln!(
                machining_csv,
                "{},{},{:.0},{minutes:.3},{},{}",
                e.id,
                m.operation,
                m.rpm,
                fmt_opt(reference, 1),
                fmt_opt(ratio, 3)
            );
        }
    }
    if !any {
        let _ = writeln!(text, "  none");
    }

    let _ = writeln!(text, "\nTime per phase");
    for (n, log) in logs.iter().enumerate() {
        let mut per_phase: BTreeMap<&str, i64> = BTreeMap::new();
        // records close the activity they describe
        for w in log.records.windows(2) {
            *per_phase.entry(w[1].phase.as_str()).or_default() +=
                w[1].timestamp_us - w[0].timestamp_us;
        }
        let _ = write!(text, "  log {}:", n + 1);
        if per_phase.is_empty() {
            let _ = write!(text, " empty");
        }
        for (phase, us) in &per_phase {
            let _ = write!(text, " {phase} {:.1} s", *us as f64 / 1e6);
        }
        let _ = writeln!(text);
    }
    let relocations: Vec<_> = logs.iter().flat_map(|l| l.events("relocation")).collect();
    if !relocations.is_empty() {
        let _ = writeln!(text, "\nRelocation through the liner");
        for r in relocations {
            let p = &r.payload;
            let _ = writeln!(
                text,
                "  {} axial error {} mm, angular error {} deg",
                p["id"].as_str().unwrap_or("?"),
                fmt_opt(p["axial_error_mm"].as_f64(), 3),
                fmt_opt(p["angular_error_deg"].as_f64(), 3)
            );
        }
    }
    MissionReport {
        text,
        distances_csv,
        machining_csv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report() {
        let r = mission_report(&[MissionLog::default()], &BranchMap::new("p"), None);
        assert!(r.text.contains("Branches (0 entries)"));
        assert_eq!(r.distances_csv.lines().count(), 1);
    }
}
