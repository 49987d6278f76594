//! Ground-truth pipe geometry.
//!
//! Coordinates: axial positions `z` are metres from the insertion end,
//! radial distances and hole dimensions are millimetres, and angles are
//! degrees with `θ = 0` at the pipe top, increasing clockwise when looking
//! down the pipe from the insertion end. Branch holes are discs on the
//! unrolled cast-iron surface `(z·1000, R·θ)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::geometry::{angle_diff_deg, wrap_deg, Disc, Rect};
use crate::motion::MachiningDefaults;
use crate::sensors::SensorDefaults;

/// Longest pipe section handled in one run.
pub const MAX_SECTION_LENGTH_M: f64 = 200.0;
/// Nominal cast-iron bore radius (DN100).
pub const DEFAULT_CAST_RADIUS_MM: f64 = 50.0;
/// Bore radius once the HDPE liner is in place.
pub const DEFAULT_LINER_RADIUS_MM: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("branches {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("axial position {z} m outside pipe [0, {length}] m")]
    Range { z: f64, length: f64 },
    #[error("no branch with index {0}")]
    UnknownBranch(usize),
}

fn default_cast_radius() -> f64 {
    DEFAULT_CAST_RADIUS_MM
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinerSpec {
    pub inner_radius: f64,
    pub thickness: f64,
    #[serde(default)]
    pub conductivity_relative: f64,
}

impl Default for LinerSpec {
    fn default() -> Self {
        LinerSpec {
            inner_radius: DEFAULT_LINER_RADIUS_MM,
            thickness: DEFAULT_CAST_RADIUS_MM - DEFAULT_LINER_RADIUS_MM,
            conductivity_relative: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchConnection {
    /// Hole centre, metres.
    pub axial_pos: f64,
    /// Degrees in `[0, 360)`, 0 at the top.
    pub angular_pos: f64,
    pub hole_diameter: f64,
    /// Circumferential offset of the valve axis from the bore axis, mm.
    #[serde(default)]
    pub valve_axis_offset: f64,
    /// Distance from the cast-iron inner wall to the valve face, mm.
    pub valve_depth: f64,
    #[serde(default = "default_true")]
    pub hardware_present: bool,
    /// Diameter of the opening cut through the liner, once drilled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liner_opening_diameter: Option<f64>,
}

impl BranchConnection {
    pub fn hole_radius(&self) -> f64 {
        self.hole_diameter / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub axial_pos: f64,
    pub deflection_deg: f64,
}

/// File-loadable description of a scenario plus sensor and machining defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub pipe_id: String,
    pub length: f64,
    #[serde(default = "default_cast_radius")]
    pub inner_radius_cast: f64,
    #[serde(default)]
    pub liner: Option<LinerSpec>,
    #[serde(default)]
    pub branches: Vec<BranchConnection>,
    #[serde(default)]
    pub joints: Vec<Joint>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sensors: SensorDefaults,
    #[serde(default)]
    pub machining: MachiningDefaults,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario config serializes")
    }

    /// Rebuild a config from an existing scenario, keeping the given defaults.
    pub fn from_scenario(
        scenario: &PipeScenario,
        sensors: SensorDefaults,
        machining: MachiningDefaults,
    ) -> Self {
        ScenarioConfig {
            pipe_id: scenario.pipe_id.clone(),
            length: scenario.length,
            inner_radius_cast: scenario.inner_radius_cast,
            liner: scenario.liner.clone(),
            branches: scenario.branches.clone(),
            joints: scenario.joints.clone(),
            seed: scenario.seed,
            sensors,
            machining,
        }
    }
}

/// Immutable, validated pipe geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipeScenario {
    pipe_id: String,
    length: f64,
    inner_radius_cast: f64,
    liner: Option<LinerSpec>,
    branches: Vec<BranchConnection>,
    joints: Vec<Joint>,
    seed: u64,
}

/// What a radial ray from the pipe axis sees at `(z, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceSample {
    Wall {
        radius: f64,
    },
    /// Looking into a branch hole. `None` means no valve face in line of sight.
    HoleInterior {
        depth_to_valve: Option<f64>,
    },
}

/// Coil sensing area on the unrolled cast-iron surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilFootprint {
    /// Axial centre, metres.
    pub z: f64,
    /// Circumferential centre, degrees.
    pub theta: f64,
    pub axial_extent: f64,
    pub circ_extent: f64,
}

pub fn build_scenario(config: &ScenarioConfig) -> Result<PipeScenario, WorldError> {
    let geom = |msg: String| Err(WorldError::Geometry(msg));
    if !(config.length > 0.0 && config.length <= MAX_SECTION_LENGTH_M) {
        return geom(format!(
            "length {} m outside (0, {MAX_SECTION_LENGTH_M}]",
            config.length
        ));
    }
    if !(config.inner_radius_cast > 0.0) {
        return geom("cast-iron radius must be positive".into());
    }
    if let Some(liner) = &config.liner {
        validate_liner(liner, config.inner_radius_cast)?;
    }
    for (i, b) in config.branches.iter().enumerate() {
        if !(0.0..=config.length).contains(&b.axial_pos) {
            return Err(WorldError::Range {
                z: b.axial_pos,
                length: config.length,
            });
        }
        if !(0.0..360.0).contains(&b.angular_pos) {
            return geom(format!(
                "branch {i}: angle {} outside [0, 360)",
                b.angular_pos
            ));
        }
        if !(b.hole_diameter > 0.0) {
            return geom(format!("branch {i}: hole diameter must be positive"));
        }
        if !(b.valve_axis_offset >= 0.0) || !(b.valve_depth >= 0.0) {
            return geom(format!("branch {i}: negative valve offset or depth"));
        }
    }
    for j in &config.joints {
        if !(0.0..=config.length).contains(&j.axial_pos) {
            return Err(WorldError::Range {
                z: j.axial_pos,
                length: config.length,
            });
        }
    }

    let mut branches = config.branches.clone();
    branches.sort_by(|a, b| a.axial_pos.total_cmp(&b.axial_pos));
    let scenario = PipeScenario {
        pipe_id: config.pipe_id.clone(),
        length: config.length,
        inner_radius_cast: config.inner_radius_cast,
        liner: config.liner.clone(),
        branches,
        joints: config.joints.clone(),
        seed: config.seed,
    };
    scenario.check_overlaps()?;
    Ok(scenario)
}

fn validate_liner(liner: &LinerSpec, cast_radius: f64) -> Result<(), WorldError> {
    if !(liner.inner_radius > 0.0) || !(liner.thickness >= 0.0) {
        return Err(WorldError::Geometry(
            "liner dimensions must be positive".into(),
        ));
    }
    if liner.inner_radius >= cast_radius {
        return Err(WorldError::Geometry(format!(
            "liner radius {} must be below bore radius {cast_radius}",
            liner.inner_radius
        )));
    }
    if liner.inner_radius + liner.thickness > cast_radius + 1e-9 {
        return Err(WorldError::Geometry(format!(
            "liner {} + {} mm is thicker than the bore {cast_radius} mm",
            liner.inner_radius, liner.thickness
        )));
    }
    Ok(())
}

impl PipeScenario {
    pub fn pipe_id(&self) -> &str {
        &self.pipe_id
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn inner_radius_cast(&self) -> f64 {
        self.inner_radius_cast
    }

    pub fn liner(&self) -> Option<&LinerSpec> {
        self.liner.as_ref()
    }

    pub fn is_lined(&self) -> bool {
        self.liner.is_some()
    }

    pub fn branches(&self) -> &[BranchConnection] {
        &self.branches
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Liner standoff between the coils and the cast iron, mm.
    pub fn liftoff(&self) -> f64 {
        self.liner.as_ref().map_or(0.0, |l| l.thickness)
    }

    /// Radius of the surface the robot rides on.
    pub fn bore_radius(&self) -> f64 {
        self.liner
            .as_ref()
            .map_or(self.inner_radius_cast, |l| l.inner_radius)
    }

    /// Copy of this scenario with a liner installed.
    pub fn relined(&self, liner: LinerSpec) -> Result<PipeScenario, WorldError> {
        validate_liner(&liner, self.inner_radius_cast)?;
        let mut next = self.clone();
        next.liner = Some(liner);
        Ok(next)
    }

    pub(crate) fn branch_mut(&mut self, index: usize) -> Result<&mut BranchConnection, WorldError> {
        self.branches
            .get_mut(index)
            .ok_or(WorldError::UnknownBranch(index))
    }

    /// Arc length along the cast-iron wall for an angle in degrees.
    pub fn arc_mm(&self, theta_deg: f64) -> f64 {
        self.inner_radius_cast * theta_deg.to_radians()
    }

    fn circumference(&self) -> f64 {
        2.0 * PI * self.inner_radius_cast
    }

    fn hole_disc(&self, b: &BranchConnection) -> Disc {
        Disc {
            z: b.axial_pos * 1000.0,
            s: self.arc_mm(b.angular_pos),
            radius: b.hole_radius(),
        }
    }

    /// Unrolled offset `(dz, ds)` in mm from the centre of branch `b`,
    /// with `ds` taken along the shortest way round.
    fn offset_from(&self, b: &BranchConnection, z: f64, theta: f64) -> (f64, f64) {
        let dz = (z - b.axial_pos) * 1000.0;
        let ds = self.arc_mm(angle_diff_deg(theta, b.angular_pos));
        (dz, ds)
    }

    fn check_overlaps(&self) -> Result<(), WorldError> {
        for i in 0..self.branches.len() {
            for j in (i + 1)..self.branches.len() {
                let a = &self.branches[i];
                let b = &self.branches[j];
                let (dz, ds) = self.offset_from(a, b.axial_pos, b.angular_pos);
                let reach = a.hole_radius() + b.hole_radius();
                if dz * dz + ds * ds < reach * reach {
                    return Err(WorldError::Overlap(i, j));
                }
            }
        }
        Ok(())
    }

    /// Index of the branch hole containing `(z, θ)`, if any.
    pub fn branch_at(&self, z: f64, theta: f64) -> Option<usize> {
        // linear scan with an axial prefilter
        self.branches.iter().position(|b| {
            let r = b.hole_radius();
            if ((z - b.axial_pos) * 1000.0).abs() > r {
                return false;
            }
            let (dz, ds) = self.offset_from(b, z, theta);
            dz * dz + ds * ds <= r * r
        })
    }

    fn check_z(&self, z: f64) -> Result<(), WorldError> {
        if (0.0..=self.length).contains(&z) {
            Ok(())
        } else {
            Err(WorldError::Range {
                z,
                length: self.length,
            })
        }
    }

    /// Surface seen along a radial ray at `(z, θ)`.
    ///
    /// With `lined` set and a liner installed the liner wall is returned
    /// everywhere except inside a drilled liner opening.
    pub fn surface_radius_at(
        &self,
        z: f64,
        theta: f64,
        lined: bool,
    ) -> Result<SurfaceSample, WorldError> {
        self.check_z(z)?;
        let theta = wrap_deg(theta);
        let hole = self.branch_at(z, theta);
        if lined {
            let liner = self
                .liner
                .as_ref()
                .ok_or_else(|| WorldError::Geometry("scenario has no liner".into()))?;
            let opened = hole.is_some_and(|i| {
                let b = &self.branches[i];
                b.liner_opening_diameter.is_some_and(|d| {
                    let (dz, ds) = self.offset_from(b, z, theta);
                    dz * dz + ds * ds <= d * d / 4.0
                })
            });
            if !opened {
                return Ok(SurfaceSample::Wall {
                    radius: liner.inner_radius,
                });
            }
        }
        let Some(i) = hole else {
            return Ok(SurfaceSample::Wall {
                radius: self.inner_radius_cast,
            });
        };
        let b = &self.branches[i];
        if !b.hardware_present {
            return Ok(SurfaceSample::HoleInterior {
                depth_to_valve: None,
            });
        }
        // the valve bore has the hole's diameter; its axis is shifted
        // circumferentially by the valve offset
        let (dz, ds) = self.offset_from(b, z, theta);
        let dv = ds - b.valve_axis_offset;
        let r = b.hole_radius();
        let depth = (dz * dz + dv * dv <= r * r).then_some(b.valve_depth);
        Ok(SurfaceSample::HoleInterior {
            depth_to_valve: depth,
        })
    }

    /// Area fraction of a coil footprint lying over branch holes in the cast iron.
    pub fn hole_overlap(&self, footprint: &CoilFootprint) -> f64 {
        let rect = Rect::centered(
            footprint.z * 1000.0,
            self.arc_mm(wrap_deg(footprint.theta)),
            footprint.axial_extent,
            footprint.circ_extent,
        );
        let area = rect.area();
        if area <= 0.0 {
            return 0.0;
        }
        let c = self.circumference();
        let covered: f64 = self
            .branches
            .iter()
            .map(|b| {
                let disc = self.hole_disc(b);
                // periodic images cover footprints straddling θ = 0
                [-c, 0.0, c]
                    .iter()
                    .map(|shift| {
                        Disc {
                            s: disc.s + shift,
                            ..disc
                        }
                        .rect_intersection_area(&rect)
                    })
                    .sum::<f64>()
            })
            .sum();
        (covered / area).clamp(0.0, 1.0)
    }
}

/// Named scenario templates.
pub mod templates {
    use super::*;

    pub const NAMES: [&str; 2] = ["lab8m", "table1"];

    /// Inter-branch spacings of the six surveyed sections, metres.
    pub const TABLE1_SPACINGS: [f64; 6] = [0.23, 0.308, 0.265, 0.63, 1.635, 1.50];

    fn standard_branch(axial_pos: f64, angular_pos: f64) -> BranchConnection {
        BranchConnection {
            axial_pos,
            angular_pos,
            hole_diameter: 20.0,
            valve_axis_offset: 0.0,
            valve_depth: 30.0,
            hardware_present: true,
            liner_opening_diameter: None,
        }
    }

    /// 8 m laboratory pipe with two pre-bored Ø20 branches.
    pub fn lab8m() -> ScenarioConfig {
        ScenarioConfig {
            pipe_id: "lab8m".into(),
            length: 8.0,
            inner_radius_cast: DEFAULT_CAST_RADIUS_MM,
            liner: None,
            branches: vec![standard_branch(3.0, 0.0), standard_branch(4.635, 90.0)],
            joints: vec![Joint {
                axial_pos: 4.0,
                deflection_deg: 1.5,
            }],
            seed: 7,
            sensors: SensorDefaults::default(),
            machining: MachiningDefaults::default(),
        }
    }

    /// One pipe with seven branches whose consecutive spacings are the six
    /// surveyed section lengths.
    pub fn table1() -> ScenarioConfig {
        // centres half a millimetre off the 1 mm reading grid
        let mut z = 0.5005;
        let mut branches = vec![standard_branch(z, 0.0)];
        for spacing in TABLE1_SPACINGS {
            z += spacing;
            branches.push(standard_branch((z * 1e4).round() / 1e4, 0.0));
        }
        ScenarioConfig {
            pipe_id: "table1".into(),
            length: 6.0,
            inner_radius_cast: DEFAULT_CAST_RADIUS_MM,
            liner: None,
            branches,
            joints: Vec::new(),
            seed: 1,
            sensors: SensorDefaults::default(),
            machining: MachiningDefaults::default(),
        }
    }

    pub fn by_name(name: &str) -> Option<ScenarioConfig> {
        match name {
            "lab8m" => Some(lab8m()),
            "table1" => Some(table1()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn base_config() -> ScenarioConfig {
        ScenarioConfig {
            pipe_id: "t".into(),
            length: 8.0,
            inner_radius_cast: 50.0,
            liner: None,
            branches: Vec::new(),
            joints: Vec::new(),
            seed: 0,
            sensors: SensorDefaults::default(),
            machining: MachiningDefaults::default(),
        }
    }

    fn branch(z: f64, theta: f64) -> BranchConnection {
        BranchConnection {
            axial_pos: z,
            angular_pos: theta,
            hole_diameter: 20.0,
            valve_axis_offset: 0.0,
            valve_depth: 30.0,
            hardware_present: true,
            liner_opening_diameter: None,
        }
    }

    #[test]
    fn lab_pipe_builds() {
        let mut cfg = base_config();
        cfg.branches = vec![branch(3.0, 0.0), branch(4.635, 0.0)];
        let s = build_scenario(&cfg).unwrap();
        assert_eq!(s.branches().len(), 2);
        assert_eq!(s.length(), 8.0);
    }

    #[test]
    fn empty_pipe_builds() {
        let s = build_scenario(&base_config()).unwrap();
        assert!(s.branches().is_empty());
    }

    #[test]
    fn coincident_branches_overlap() {
        let mut cfg = base_config();
        cfg.branches = vec![branch(2.0, 45.0), branch(2.0, 45.0)];
        assert_eq!(build_scenario(&cfg), Err(WorldError::Overlap(0, 1)));
    }

    #[test]
    fn overlap_across_angle_wrap() {
        let mut cfg = base_config();
        cfg.branches = vec![branch(2.0, 359.0), branch(2.0, 1.0)];
        assert!(matches!(build_scenario(&cfg), Err(WorldError::Overlap(..))));
    }

    #[test]
    fn thick_liner_rejected() {
        let mut cfg = base_config();
        cfg.liner = Some(LinerSpec {
            inner_radius: 40.0,
            thickness: 12.0,
            conductivity_relative: 0.0,
        });
        assert!(matches!(build_scenario(&cfg), Err(WorldError::Geometry(_))));
        cfg.liner = Some(LinerSpec {
            inner_radius: 50.0,
            thickness: 0.0,
            conductivity_relative: 0.0,
        });
        assert!(matches!(build_scenario(&cfg), Err(WorldError::Geometry(_))));
    }

    #[test]
    fn length_limits() {
        let mut cfg = base_config();
        cfg.length = 200.5;
        assert!(build_scenario(&cfg).is_err());
        cfg.length = 0.0;
        assert!(build_scenario(&cfg).is_err());
        cfg.length = 200.0;
        assert!(build_scenario(&cfg).is_ok());
    }

    #[test]
    fn surface_samples() {
        let mut cfg = base_config();
        cfg.branches = vec![branch(3.0, 90.0)];
        let s = build_scenario(&cfg).unwrap();
        assert_eq!(
            s.surface_radius_at(1.0, 0.0, false).unwrap(),
            SurfaceSample::Wall { radius: 50.0 }
        );
        assert_eq!(
            s.surface_radius_at(3.0, 90.0, false).unwrap(),
            SurfaceSample::HoleInterior {
                depth_to_valve: Some(30.0)
            }
        );
        let lined = s.relined(LinerSpec::default()).unwrap();
        assert_eq!(
            lined.surface_radius_at(3.0, 90.0, true).unwrap(),
            SurfaceSample::Wall { radius: 40.0 }
        );
        assert!(matches!(
            s.surface_radius_at(8.1, 0.0, false),
            Err(WorldError::Range { .. })
        ));
        assert!(s.surface_radius_at(3.0, 90.0, true).is_err());
    }

    #[test]
    fn surface_is_periodic_in_theta() {
        let mut cfg = base_config();
        cfg.branches = vec![branch(3.0, 5.0)];
        let s = build_scenario(&cfg).unwrap();
        for k in 0..200 {
            let theta = -20.0 + k as f64 * 0.2;
            let z = 3.0 + (k as f64 - 100.0) * 1e-4;
            assert_eq!(
                s.surface_radius_at(z, theta, false).unwrap(),
                s.surface_radius_at(z, theta + 360.0, false).unwrap()
            );
        }
    }

    #[test]
    fn absent_fitting_has_no_valve_face() {
        let mut cfg = base_config();
        let mut b = branch(3.0, 0.0);
        b.hardware_present = false;
        cfg.branches = vec![b];
        let s = build_scenario(&cfg).unwrap();
        assert_eq!(
            s.surface_radius_at(3.0, 0.0, false).unwrap(),
            SurfaceSample::HoleInterior {
                depth_to_valve: None
            }
        );
    }

    #[test]
    fn overlap_extremes() {
        let mut cfg = base_config();
        cfg.branches = vec![branch(3.0, 90.0)];
        let s = build_scenario(&cfg).unwrap();
        let far = CoilFootprint {
            z: 1.0,
            theta: 90.0,
            axial_extent: 10.0,
            circ_extent: 10.0,
        };
        assert_eq!(s.hole_overlap(&far), 0.0);
        let inside = CoilFootprint {
            z: 3.0,
            theta: 90.0,
            axial_extent: 5.0,
            circ_extent: 5.0,
        };
        assert_abs_diff_eq!(s.hole_overlap(&inside), 1.0, epsilon = 1e-12);
    }

    /// Dense Monte-Carlo area estimate, independent of the closed form.
    fn mc_overlap(s: &PipeScenario, fp: &CoilFootprint, n: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = s.inner_radius_cast();
        let mut hits = 0usize;
        for _ in 0..n {
            let dz: f64 = rng.random_range(-0.5..0.5) * fp.axial_extent;
            let ds: f64 = rng.random_range(-0.5..0.5) * fp.circ_extent;
            let z = fp.z + dz / 1000.0;
            let theta = fp.theta + (ds / r).to_degrees();
            if s.branch_at(z, wrap_deg(theta)).is_some() {
                hits += 1;
            }
        }
        hits as f64 / n as f64
    }

    #[test]
    fn rim_overlap_matches_monte_carlo() {
        let mut cfg = base_config();
        cfg.branches = vec![branch(3.0, 90.0)];
        let s = build_scenario(&cfg).unwrap();
        // centred on the axial rim of the Ø20 hole
        let fp = CoilFootprint {
            z: 3.010,
            theta: 90.0,
            axial_extent: 10.0,
            circ_extent: 10.0,
        };
        let oracle = mc_overlap(&s, &fp, 2_000_000, 11);
        let exact = s.hole_overlap(&fp);
        assert!(
            (exact - oracle).abs() < 1e-3,
            "exact {exact} oracle {oracle}"
        );
        // frozen Monte-Carlo value (2e6 samples, seed 11)
        assert!((exact - 0.4564).abs() < 1e-3, "exact {exact}");
    }

    #[test]
    fn overlap_across_theta_zero() {
        let mut cfg = base_config();
        cfg.branches = vec![branch(3.0, 0.0)];
        let s = build_scenario(&cfg).unwrap();
        let fp = CoilFootprint {
            z: 3.0,
            theta: 358.0,
            axial_extent: 10.0,
            circ_extent: 10.0,
        };
        let oracle = mc_overlap(&s, &fp, 400_000, 3);
        assert!((s.hole_overlap(&fp) - oracle).abs() < 3e-3);
        assert!(s.hole_overlap(&fp) > 0.9);
    }

    #[test]
    fn overlap_is_lipschitz_under_translation() {
        let mut cfg = base_config();
        cfg.branches = vec![branch(3.0, 90.0)];
        let s = build_scenario(&cfg).unwrap();
        let eps_mm = 0.01;
        let (a, c) = (10.0, 10.0);
        let bound = 2.0 * (a + c) * eps_mm / (a * c);
        for k in 0..80 {
            let z = 2.98 + k as f64 * 0.0005;
            let fp = CoilFootprint {
                z,
                theta: 88.0,
                axial_extent: a,
                circ_extent: c,
            };
            let moved = CoilFootprint {
                z: z + eps_mm / 1000.0,
                ..fp
            };
            let delta = (s.hole_overlap(&fp) - s.hole_overlap(&moved)).abs();
            assert!(delta <= bound + 1e-2, "jump {delta} at z={z}");
            assert!(delta <= bound + 1e-12, "jump {delta} exceeds {bound}");
        }
    }

    #[test]
    fn lining_keeps_branch_truth() {
        let s = build_scenario(&templates::lab8m()).unwrap();
        let lined = s.relined(LinerSpec::default()).unwrap();
        assert_eq!(s.branches(), lined.branches());
        assert_eq!(lined.liftoff(), 10.0);
    }

    #[test]
    fn config_round_trip() {
        let cfg = templates::table1();
        let text = cfg.to_json();
        assert_eq!(ScenarioConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn templates_are_valid() {
        for name in templates::NAMES {
            build_scenario(&templates::by_name(name).unwrap()).unwrap();
        }
        let t = build_scenario(&templates::table1()).unwrap();
        let gaps: Vec<f64> = t
            .branches()
            .windows(2)
            .map(|w| w[1].axial_pos - w[0].axial_pos)
            .collect();
        for (g, want) in gaps.iter().zip(templates::TABLE1_SPACINGS) {
            assert_abs_diff_eq!(*g, want, epsilon = 1e-9);
        }
    }
}
