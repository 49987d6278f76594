use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{
    delta_ik, MachiningDefaults, MotionError, SCREW_FORCE_LIMIT_N, SPINDLE_RPM_LIMIT,
    SPINDLE_TORQUE_LIMIT_NM,
};

/// Spindle speed below which the liner cutter tends to screw itself in.
pub const JAM_SAFE_RPM: f64 = 2800.0;

/// Clearance above the material for rapid moves, mm.
const CLEARANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Material {
    CastIron,
    Hdpe,
}

impl Material {
    pub fn as_str(&self) -> &'static str {
        match self {
            Material::CastIron => "cast_iron",
            Material::Hdpe => "hdpe",
        }
    }
}

/// Cutting parameters for one material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub tool_diameter: f64,
    pub teeth: u32,
    /// Radius added per pass, mm.
    pub radial_doc: f64,
    /// Axial advance per helix turn, mm.
    pub helix_pitch: f64,
    /// Material thickness to cut through, mm.
    pub thickness: f64,
    pub rpm: f64,
    /// Cutting feed, mm/s.
    pub feed: f64,
    /// Per-screw radial force per unit (depth of cut × feed), N·s/mm².
    pub force_coeff: f64,
    /// Specific cutting energy, N/mm².
    pub cutting_energy: f64,
}

impl MaterialParams {
    pub fn cast_iron() -> Self {
        MaterialParams {
            tool_diameter: 8.0,
            teeth: 2,
            radial_doc: 0.1,
            helix_pitch: 0.3,
            thickness: 9.0,
            rpm: 3000.0,
            feed: 16.5,
            force_coeff: 120.0,
            cutting_energy: 1500.0,
        }
    }

    pub fn hdpe() -> Self {
        MaterialParams {
            tool_diameter: 16.0,
            teeth: 2,
            radial_doc: 0.5,
            helix_pitch: 1.0,
            thickness: 10.0,
            rpm: 3000.0,
            feed: 2.35,
            force_coeff: 20.0,
            cutting_energy: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutter {
    pub diameter: f64,
    pub teeth: u32,
}

impl Default for Cutter {
    fn default() -> Self {
        Cutter {
            diameter: 20.0,
            teeth: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Helix,
    Line,
    Dwell,
}

impl SegmentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SegmentKind::Helix => "helix",
            SegmentKind::Line => "line",
            SegmentKind::Dwell => "dwell",
        }
    }
}

/// One tool move in the delta frame `[x, y, w]`, mm, with the hole axis
/// on `x = y = 0` and `w` increasing into the material. Helices turn
/// about the hole axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: [f64; 3],
    pub end: [f64; 3],
    #[serde(default)]
    pub turns: f64,
    /// mm/s
    pub feed: f64,
    pub spindle_rpm: f64,
    pub radial_doc: f64,
    /// Axial plunge into material with the full cutter face.
    #[serde(default)]
    pub plunge: bool,
    /// Dwell time, s.
    #[serde(default)]
    pub dwell: f64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        let dw = self.end[2] - self.start[2];
        match self.kind {
            SegmentKind::Helix => {
                let r = self.start[0].hypot(self.start[1]);
                (2.0 * PI * r * self.turns).hypot(dw)
            }
            SegmentKind::Line => (self.end[0] - self.start[0])
                .hypot(self.end[1] - self.start[1])
                .hypot(dw),
            SegmentKind::Dwell => 0.0,
        }
    }

    pub fn duration(&self) -> f64 {
        let moving = if self.feed > 0.0 {
            self.length() / self.feed
        } else {
            0.0
        };
        moving + self.dwell
    }

    fn cutting(&self) -> bool {
        self.radial_doc > 0.0
    }

    /// Points to check against the delta workspace.
    fn probe_points(&self) -> Vec<[f64; 3]> {
        match self.kind {
            SegmentKind::Helix => {
                let r = self.start[0].hypot(self.start[1]);
                let mut pts = Vec::with_capacity(24);
                for w in [self.start[2], self.end[2]] {
                    pts.extend((0..12).map(|k| {
                        let a = k as f64 * PI / 6.0;
                        [r * a.cos(), r * a.sin(), w]
                    }));
                }
                pts
            }
            _ => vec![self.start, self.end],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Toolpath {
    pub material: Material,
    pub initial_diameter: f64,
    pub final_diameter: f64,
    pub segments: Vec<Segment>,
    /// s
    pub predicted_duration: f64,
    pub max_force_per_screw: f64,
    /// Nm
    pub torque_demand: f64,
    /// Probability of a jam per plunge segment.
    pub jam_risk: f64,
}

impl Toolpath {
    fn empty(material: Material, diameter: f64) -> Self {
        Toolpath {
            material,
            initial_diameter: diameter,
            final_diameter: diameter,
            segments: Vec::new(),
            predicted_duration: 0.0,
            max_force_per_screw: 0.0,
            torque_demand: 0.0,
            jam_risk: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Number of helical passes.
    pub fn passes(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.kind == SegmentKind::Helix)
            .count()
    }

    fn finish(
        mut self,
        params: &MaterialParams,
        defaults: &MachiningDefaults,
    ) -> Result<Self, MotionError> {
        let omega = params.rpm * 2.0 * PI / 60.0;
        let (mut force, mut torque) = (0.0f64, 0.0f64);
        for s in self.segments.iter().filter(|s| s.cutting()) {
            force = force.max(params.force_coeff * s.radial_doc * s.feed);
            // removal rate of a helix pass is doc × pitch × feed, of a plunge the cutter face × feed
            let mrr = if s.plunge {
                PI * s.radial_doc * s.radial_doc * s.feed
            } else {
                s.radial_doc * params.helix_pitch * s.feed
            };
            torque = torque.max(params.cutting_energy * mrr * 1e-3 / omega);
        }
        if force > SCREW_FORCE_LIMIT_N {
            return Err(MotionError::ForceLimit {
                force,
                limit: SCREW_FORCE_LIMIT_N,
            });
        }
        if torque > SPINDLE_TORQUE_LIMIT_NM {
            return Err(MotionError::TorqueLimit {
                torque,
                limit: SPINDLE_TORQUE_LIMIT_NM,
            });
        }
        for s in &self.segments {
            for p in s.probe_points() {
                delta_ik(&defaults.delta, p)?;
            }
        }
        self.max_force_per_screw = force;
        self.torque_demand = torque;
        self.predicted_duration = self.segments.iter().map(Segment::duration).sum();
        Ok(self)
    }
}

fn check_rpm(rpm: f64) -> Result<(), MotionError> {
    if rpm > 0.0 && rpm <= SPINDLE_RPM_LIMIT {
        Ok(())
    } else {
        Err(MotionError::SpindleLimit(rpm))
    }
}

fn line(start: [f64; 3], end: [f64; 3], feed: f64, rpm: f64) -> Segment {
    Segment {
        kind: SegmentKind::Line,
        start,
        end,
        turns: 0.0,
        feed,
        spindle_rpm: rpm,
        radial_doc: 0.0,
        plunge: false,
        dwell: 0.0,
    }
}

fn bore_with(
    initial_d: f64,
    target_d: f64,
    material: Material,
    params: &MaterialParams,
    defaults: &MachiningDefaults,
) -> Result<Toolpath, MotionError> {
    if !(initial_d > 0.0) || !(target_d >= initial_d) {
        return Err(MotionError::Parameter(format!(
            "cannot bore {initial_d} mm to {target_d} mm"
        )));
    }
    if target_d - initial_d < 1e-12 {
        return Ok(Toolpath::empty(material, initial_d));
    }
    if !(params.tool_diameter < initial_d) {
        return Err(MotionError::Parameter(format!(
            "tool Ø{} does not fit the Ø{initial_d} pre-bore",
            params.tool_diameter
        )));
    }
    if !(params.radial_doc > 0.0
        && params.helix_pitch > 0.0
        && params.feed > 0.0
        && params.thickness > 0.0)
    {
        return Err(MotionError::Parameter(
            "depth of cut, pitch, feed and thickness must be positive".into(),
        ));
    }
    check_rpm(params.rpm)?;

    let rapid = defaults.rapid_feed;
    let rpm = params.rpm;
    let passes = (((target_d - initial_d) / 2.0) / params.radial_doc - 1e-9).ceil() as usize;
    let turns = params.thickness / params.helix_pitch;
    let mut segments = Vec::with_capacity(passes * 5);
    let mut radius = initial_d / 2.0;
    for k in 1..=passes {
        let next = (initial_d / 2.0 + k as f64 * params.radial_doc).min(target_d / 2.0);
        let doc = next - radius;
        radius = next;
        let rho = radius - params.tool_diameter / 2.0;
        let end_angle = 2.0 * PI * turns;
        let bottom = [
            rho * end_angle.cos(),
            rho * end_angle.sin(),
            params.thickness,
        ];
        segments.push(line(
            [0.0, 0.0, -CLEARANCE],
            [rho, 0.0, -CLEARANCE],
            rapid,
            rpm,
        ));
        segments.push(line(
            [rho, 0.0, -CLEARANCE],
            [rho, 0.0, 0.0],
            params.feed,
            rpm,
        ));
        segments.push(Segment {
            kind: SegmentKind::Helix,
            start: [rho, 0.0, 0.0],
            end: bottom,
            turns,
            feed: params.feed,
            spindle_rpm: rpm,
            radial_doc: doc,
            plunge: false,
            dwell: 0.0,
        });
        segments.push(line(bottom, [0.0, 0.0, params.thickness], rapid, rpm));
        segments.push(line(
            [0.0, 0.0, params.thickness],
            [0.0, 0.0, -CLEARANCE],
            rapid,
            rpm,
        ));
    }
    let mut path = Toolpath::empty(material, initial_d);
    path.final_diameter = target_d;
    path.segments = segments;
    path.finish(params, defaults)
}

/// Helical boring from `initial_d` to `target_d` in passes of the
/// material's radial depth of cut.
pub fn plan_bore(
    initial_d: f64,
    target_d: f64,
    material: Material,
    defaults: &MachiningDefaults,
) -> Result<Toolpath, MotionError> {
    bore_with(
        initial_d,
        target_d,
        material,
        defaults.material(material),
        defaults,
    )
}

/// `clamp((2800 - rpm) / 2800, 0, 1)`
pub fn jam_risk(rpm: f64) -> f64 {
    ((JAM_SAFE_RPM - rpm) / JAM_SAFE_RPM).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeDrillPlan {
    /// Plunge through the liner with the full cutter.
    pub drill: Toolpath,
    /// Optional helical ream to the target diameter.
    pub ream: Option<Toolpath>,
    pub jam_risk: f64,
}

impl PeDrillPlan {
    pub fn predicted_duration(&self) -> f64 {
        self.drill.predicted_duration + self.ream.as_ref().map_or(0.0, |r| r.predicted_duration)
    }
}

/// Plunge drill through the liner, then ream up to `target_d` if larger
/// than the cutter.
pub fn plan_pe_drill(
    target_d: f64,
    cutter: &Cutter,
    rpm: f64,
    defaults: &MachiningDefaults,
) -> Result<PeDrillPlan, MotionError> {
    check_rpm(rpm)?;
    if !(cutter.diameter > 0.0) || target_d < cutter.diameter - 1e-12 {
        return Err(MotionError::Parameter(format!(
            "target Ø{target_d} is smaller than the Ø{} cutter",
            cutter.diameter
        )));
    }
    if !(defaults.plunge_feed > 0.0) {
        return Err(MotionError::Parameter(
            "plunge feed must be positive".into(),
        ));
    }
    let mut params = defaults.hdpe.clone();
    params.rpm = rpm;
    let depth = params.thickness + defaults.plunge_overtravel;
    let rapid = defaults.rapid_feed;
    let risk = jam_risk(rpm);

    let mut drill = Toolpath::empty(Material::Hdpe, 0.0);
    drill.final_diameter = cutter.diameter;
    drill.segments = vec![
        line([0.0, 0.0, -CLEARANCE], [0.0, 0.0, 0.0], rapid, rpm),
        Segment {
            kind: SegmentKind::Line,
            start: [0.0, 0.0, 0.0],
            end: [0.0, 0.0, depth],
            turns: 0.0,
            feed: defaults.plunge_feed,
            spindle_rpm: rpm,
            radial_doc: cutter.diameter / 2.0,
            plunge: true,
            dwell: 0.0,
        },
        line([0.0, 0.0, depth], [0.0, 0.0, -CLEARANCE], rapid, rpm),
    ];
    drill.jam_risk = risk;
    let drill = drill.finish(&params, defaults)?;

    let ream = if target_d > cutter.diameter + 1e-12 {
        Some(bore_with(
            cutter.diameter,
            target_d,
            Material::Hdpe,
            &params,
            defaults,
        )?)
    } else {
        None
    };
    Ok(PeDrillPlan {
        drill,
        ream,
        jam_risk: risk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_count_and_empty_plan() {
        let d = MachiningDefaults::default();
        let p = plan_bore(20.0, 24.4, Material::CastIron, &d).unwrap();
        assert_eq!(p.passes(), 22);
        assert!((p.final_diameter - 24.4).abs() < 1e-12);
        let e = plan_bore(20.0, 20.0, Material::CastIron, &d).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.predicted_duration, 0.0);
        assert!(plan_bore(20.0, 19.0, Material::CastIron, &d).is_err());
    }

    #[test]
    fn limits_hold_for_defaults() {
        let d = MachiningDefaults::default();
        let p = plan_bore(20.0, 24.4, Material::CastIron, &d).unwrap();
        assert!(p.max_force_per_screw <= SCREW_FORCE_LIMIT_N);
        assert!(p.torque_demand <= SPINDLE_TORQUE_LIMIT_NM);
        assert!(p
            .segments
            .iter()
            .all(|s| s.spindle_rpm <= SPINDLE_RPM_LIMIT));
    }

    #[test]
    fn force_limit_enforced() {
        let mut d = MachiningDefaults::default();
        d.cast_iron.radial_doc = 1.1;
        d.cast_iron.feed = 10.0;
        assert!(matches!(
            plan_bore(20.0, 24.4, Material::CastIron, &d),
            Err(MotionError::ForceLimit { .. })
        ));
    }

    #[test]
    fn oversized_bore_is_unreachable() {
        let d = MachiningDefaults::default();
        assert!(matches!(
            plan_bore(20.0, 70.0, Material::CastIron, &d),
            Err(MotionError::Unreachable(_))
        ));
    }

    #[test]
    fn duration_is_linear_in_circumference() {
        // with rapid moves removed the duration is Σ helix length / feed
        let d = MachiningDefaults::default();
        let p = plan_bore(20.0, 24.4, Material::CastIron, &d).unwrap();
        let helix: f64 = p
            .segments
            .iter()
            .filter(|s| s.kind == SegmentKind::Helix)
            .map(Segment::duration)
            .sum();
        let turns = 9.0 / 0.3;
        let expected: f64 = (1..=22)
            .map(|k| {
                let rho = 10.0 + (k as f64 * 0.1).min(2.2) - 4.0;
                (2.0 * PI * rho * turns).hypot(9.0) / 16.5
            })
            .sum();
        assert!((helix - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn jam_band() {
        assert_eq!(jam_risk(3000.0), 0.0);
        assert_eq!(jam_risk(2800.0), 0.0);
        assert!(jam_risk(1200.0) > 0.0);
        let d = MachiningDefaults::default();
        assert_eq!(
            plan_pe_drill(23.0, &Cutter::default(), 9000.0, &d),
            Err(MotionError::SpindleLimit(9000.0))
        );
        let plan = plan_pe_drill(23.0, &Cutter::default(), 1200.0, &d).unwrap();
        assert!(plan.drill.jam_risk > 0.0);
        assert_eq!(plan.ream.as_ref().unwrap().passes(), 3);
        assert!(plan_pe_drill(20.0, &Cutter::default(), 3000.0, &d)
            .unwrap()
            .ream
            .is_none());
    }
}
