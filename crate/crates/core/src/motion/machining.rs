use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Material, MotionError, Toolpath};
use crate::rng;
use crate::world::PipeScenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachiningOutcome {
    pub final_diameter: f64,
    /// s
    pub duration: f64,
    pub max_radial_force_per_screw: f64,
    pub jam_occurred: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Jams tolerated before aborting.
    pub retries: u32,
    /// Relative feed variation over the whole toolpath.
    pub feed_jitter_sigma: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            retries: 0,
            feed_jitter_sigma: 0.02,
        }
    }
}

/// Execute a toolpath on a copy of the scenario.
///
/// Cast-iron paths set the branch hole diameter, liner paths set the
/// liner opening. A jam redoes the plunge while retries remain.
pub fn simulate_machining(
    scenario: &PipeScenario,
    branch: usize,
    toolpath: &Toolpath,
    params: &SimParams,
    seed: u64,
) -> Result<(MachiningOutcome, PipeScenario), MotionError> {
    let mut next = scenario.clone();
    let current = {
        let b = next.branch_mut(branch)?;
        match toolpath.material {
            Material::CastIron => b.hole_diameter,
            Material::Hdpe => b.liner_opening_diameter.unwrap_or(0.0),
        }
    };
    if toolpath.is_empty() {
        let outcome = MachiningOutcome {
            final_diameter: current,
            duration: 0.0,
            max_radial_force_per_screw: 0.0,
            jam_occurred: false,
        };
        return Ok((outcome, next));
    }
    if !(params.feed_jitter_sigma >= 0.0) {
        return Err(MotionError::Parameter("feed jitter must be >= 0".into()));
    }

    let mut rng = rng::stream(seed, 0x3AC4);
    let mut retries = params.retries;
    let mut jammed = false;
    let mut extra = 0.0;
    for (k, segment) in toolpath
        .segments
        .iter()
        .enumerate()
        .filter(|(_, s)| s.plunge)
    {
        while toolpath.jam_risk > 0.0 && rng.random::<f64>() < toolpath.jam_risk {
            jammed = true;
            if retries == 0 {
                return Err(MotionError::JamAbort(k));
            }
            retries -= 1;
            extra += segment.duration();
        }
    }
    let factor = if params.feed_jitter_sigma > 0.0 {
        let n = Normal::new(0.0, params.feed_jitter_sigma).expect("valid sigma");
        (1.0 + n.sample(&mut rng)).max(0.0)
    } else {
        1.0
    };

    let final_diameter = current.max(toolpath.final_diameter);
    let b = next.branch_mut(branch)?;
    match toolpath.material {
        Material::CastIron => b.hole_diameter = final_diameter,
        Material::Hdpe => b.liner_opening_diameter = Some(final_diameter),
    }
    let outcome = MachiningOutcome {
        final_diameter,
        duration: (toolpath.predicted_duration + extra) * factor,
        max_radial_force_per_screw: toolpath.max_force_per_screw,
        jam_occurred: jammed,
    };
    Ok((outcome, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{plan_bore, plan_pe_drill, Cutter, MachiningDefaults};
    use crate::world::{build_scenario, templates};

    #[test]
    fn bore_updates_copy_only() {
        let s = build_scenario(&templates::lab8m()).unwrap();
        let d = MachiningDefaults::default();
        let path = plan_bore(20.0, 24.4, Material::CastIron, &d).unwrap();
        let (out, after) = simulate_machining(&s, 0, &path, &SimParams::default(), 3).unwrap();
        assert_eq!(after.branches()[0].hole_diameter, 24.4);
        assert_eq!(s.branches()[0].hole_diameter, 20.0);
        assert!(!out.jam_occurred);
        assert!((out.duration / path.predicted_duration - 1.0).abs() < 0.1);
    }

    #[test]
    fn empty_path_is_noop() {
        let s = build_scenario(&templates::lab8m()).unwrap();
        let d = MachiningDefaults::default();
        let path = plan_bore(20.0, 20.0, Material::CastIron, &d).unwrap();
        let (out, after) = simulate_machining(&s, 1, &path, &SimParams::default(), 3).unwrap();
        assert_eq!(after, s);
        assert_eq!(out.duration, 0.0);
    }

    #[test]
    fn certain_jam_without_retry_aborts() {
        let s = build_scenario(&templates::lab8m()).unwrap();
        let d = MachiningDefaults::default();
        let mut plan = plan_pe_drill(20.0, &Cutter::default(), 3000.0, &d).unwrap();
        plan.drill.jam_risk = 1.0;
        let r = simulate_machining(
            &s,
            0,
            &plan.drill,
            &SimParams {
                retries: 0,
                feed_jitter_sigma: 0.0,
            },
            1,
        );
        assert!(matches!(r, Err(MotionError::JamAbort(_))));
    }

    #[test]
    fn liner_drill_sets_opening() {
        let s = build_scenario(&templates::lab8m()).unwrap();
        let d = MachiningDefaults::default();
        let plan = plan_pe_drill(20.0, &Cutter::default(), 3000.0, &d).unwrap();
        let (out, after) =
            simulate_machining(&s, 0, &plan.drill, &SimParams::default(), 1).unwrap();
        assert_eq!(after.branches()[0].liner_opening_diameter, Some(20.0));
        assert_eq!(out.final_diameter, 20.0);
    }
}
