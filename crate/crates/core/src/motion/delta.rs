use serde::{Deserialize, Serialize};

use super::MotionError;

/// Linear-rail delta: three rails parallel to the tool axis `w`, at 120°.
///
/// Tool points are `[x, y, w]` in mm; the carriages move along `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeltaGeometry {
    /// Radial position of the rails.
    pub rail_radius: f64,
    /// Radial position of the rod joints on the effector.
    pub effector_radius: f64,
    pub rod_length: f64,
    pub carriage_travel: [f64; 2],
    /// Tool tip below the effector joint plane.
    pub tool_offset: f64,
}

impl Default for DeltaGeometry {
    fn default() -> Self {
        DeltaGeometry {
            rail_radius: 30.0,
            effector_radius: 10.0,
            rod_length: 45.0,
            carriage_travel: [0.0, 120.0],
            tool_offset: 20.0,
        }
    }
}

impl DeltaGeometry {
    fn reach_radius(&self) -> f64 {
        self.rail_radius - self.effector_radius
    }

    fn rail(&self, i: usize) -> (f64, f64) {
        let a = (120.0 * i as f64).to_radians();
        (self.reach_radius() * a.cos(), self.reach_radius() * a.sin())
    }

    fn validate(&self) -> Result<(), MotionError> {
        let [lo, hi] = self.carriage_travel;
        if !(self.reach_radius() > 0.0 && self.rod_length > self.reach_radius() && lo < hi) {
            return Err(MotionError::Kinematic("inconsistent delta geometry".into()));
        }
        Ok(())
    }
}

pub fn delta_ik(geom: &DeltaGeometry, tool: [f64; 3]) -> Result<[f64; 3], MotionError> {
    geom.validate()?;
    let [x, y, w] = tool;
    let mut out = [0.0; 3];
    for (i, c) in out.iter_mut().enumerate() {
        let (rx, ry) = geom.rail(i);
        let h2 = geom.rod_length.powi(2) - (rx - x).powi(2) - (ry - y).powi(2);
        if !(h2 >= 0.0) {
            return Err(MotionError::Unreachable(tool));
        }
        *c = w + geom.tool_offset + h2.sqrt();
        if !(geom.carriage_travel[0]..=geom.carriage_travel[1]).contains(c) {
            return Err(MotionError::TravelLimit {
                rail: i,
                position: *c,
            });
        }
    }
    Ok(out)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn scale(a: [f64; 3], k: f64) -> [f64; 3] {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Trilateration of the three rod spheres, keeping the solution below the carriages.
pub fn delta_fk(geom: &DeltaGeometry, carriages: [f64; 3]) -> Result<[f64; 3], MotionError> {
    geom.validate()?;
    for (rail, &c) in carriages.iter().enumerate() {
        if !(geom.carriage_travel[0]..=geom.carriage_travel[1]).contains(&c) {
            return Err(MotionError::TravelLimit { rail, position: c });
        }
    }
    let centre = |i: usize| {
        let (rx, ry) = geom.rail(i);
        [rx, ry, carriages[i] - geom.tool_offset]
    };
    let (p1, p2, p3) = (centre(0), centre(1), centre(2));
    let d = dot(sub(p2, p1), sub(p2, p1)).sqrt();
    let ex = scale(sub(p2, p1), 1.0 / d);
    let i = dot(ex, sub(p3, p1));
    let ey_raw = sub(sub(p3, p1), scale(ex, i));
    let ey_len = dot(ey_raw, ey_raw).sqrt();
    if ey_len < 1e-12 {
        return Err(MotionError::Kinematic("rod spheres are collinear".into()));
    }
    let ey = scale(ey_raw, 1.0 / ey_len);
    let ez = cross(ex, ey);
    let j = dot(ey, sub(p3, p1));
    // equal rod lengths simplify the classic trilateration terms
    let u = d / 2.0;
    let v = (i * i + j * j - 2.0 * i * u) / (2.0 * j);
    let h2 = geom.rod_length.powi(2) - u * u - v * v;
    if h2 < 0.0 {
        return Err(MotionError::Kinematic(
            "rod spheres do not intersect".into(),
        ));
    }
    let base = [
        p1[0] + u * ex[0] + v * ey[0],
        p1[1] + u * ex[1] + v * ey[1],
        p1[2] + u * ex[2] + v * ey[2],
    ];
    let h = h2.sqrt();
    let a = [
        base[0] + h * ez[0],
        base[1] + h * ez[1],
        base[2] + h * ez[2],
    ];
    let b = [
        base[0] - h * ez[0],
        base[1] - h * ez[1],
        base[2] - h * ez[2],
    ];
    Ok(if a[2] < b[2] { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn axis_point_has_equal_carriages() {
        let g = DeltaGeometry::default();
        let c = delta_ik(&g, [0.0, 0.0, 5.0]).unwrap();
        assert!((c[0] - c[1]).abs() < 1e-12 && (c[1] - c[2]).abs() < 1e-12);
        // 5 + 20 + sqrt(45² - 20²)
        assert!((c[0] - (25.0 + 1625f64.sqrt())).abs() < 1e-12);
        let p = delta_fk(&g, c).unwrap();
        assert!(p[0].abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn out_of_reach() {
        let g = DeltaGeometry::default();
        assert!(matches!(
            delta_ik(&g, [-30.0, 0.0, 0.0]),
            Err(MotionError::Unreachable(_))
        ));
        assert!(matches!(
            delta_ik(&g, [0.0, 0.0, 200.0]),
            Err(MotionError::TravelLimit { .. })
        ));
    }

    #[test]
    fn inconsistent_carriages() {
        let g = DeltaGeometry::default();
        assert!(matches!(
            delta_fk(&g, [0.0, 110.0, 0.0]),
            Err(MotionError::Kinematic(_))
        ));
    }

    proptest! {
        #[test]
        fn ik_is_continuous(x in -10.0..10.0f64, y in -10.0..10.0f64, w in -10.0..20.0f64, a in 0.0..6.3f64) {
            let g = DeltaGeometry::default();
            let c0 = delta_ik(&g, [x, y, w]).unwrap();
            let c1 = delta_ik(&g, [x + 1e-3 * a.cos(), y + 1e-3 * a.sin(), w]).unwrap();
            for k in 0..3 {
                prop_assert!((c0[k] - c1[k]).abs() < 1e-2);
            }
        }

        #[test]
        fn fk_inverts_ik(x in -12.0..12.0f64, y in -12.0..12.0f64, w in -10.0..20.0f64) {
            let g = DeltaGeometry::default();
            let p = delta_fk(&g, delta_ik(&g, [x, y, w]).unwrap()).unwrap();
            prop_assert!((p[0] - x).abs() < 1e-9 && (p[1] - y).abs() < 1e-9 && (p[2] - w).abs() < 1e-9);
        }
    }
}
