//! Planar helpers on the unrolled pipe surface.
//!
//! The cast-iron bore is unrolled onto a `(z, s)` plane where `z` is the
//! axial coordinate and `s = R·θ` the arc length along the circumference,
//! both in millimetres. Branch holes are discs on that plane.

use std::f64::consts::PI;

/// Wrap an angle in degrees into `[0, 360)`.
pub fn wrap_deg(theta: f64) -> f64 {
    let w = theta.rem_euclid(360.0);
    // rem_euclid can return 360.0 for tiny negative inputs
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Signed angular difference `a - b` wrapped into `(-180, 180]` degrees.
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Axis-aligned rectangle on the unrolled plane, millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub z_min: f64,
    pub z_max: f64,
    pub s_min: f64,
    pub s_max: f64,
}

impl Rect {
    pub fn centered(z: f64, s: f64, axial_extent: f64, circ_extent: f64) -> Self {
        Rect {
            z_min: z - axial_extent / 2.0,
            z_max: z + axial_extent / 2.0,
            s_min: s - circ_extent / 2.0,
            s_max: s + circ_extent / 2.0,
        }
    }

    pub fn area(&self) -> f64 {
        (self.z_max - self.z_min).max(0.0) * (self.s_max - self.s_min).max(0.0)
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.z_max - self.z_min).max(0.0) + (self.s_max - self.s_min).max(0.0))
    }
}

/// Disc on the unrolled plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub z: f64,
    pub s: f64,
    pub radius: f64,
}

impl Disc {
    pub fn contains(&self, z: f64, s: f64) -> bool {
        let dz = z - self.z;
        let ds = s - self.s;
        dz * dz + ds * ds <= self.radius * self.radius
    }

    /// Exact area of the intersection with an axis-aligned rectangle.
    pub fn rect_intersection_area(&self, rect: &Rect) -> f64 {
        let r = self.radius;
        if r <= 0.0 || rect.area() <= 0.0 {
            return 0.0;
        }
        // shift so the disc sits at the origin; u is axial, v circumferential
        let u1 = rect.z_min - self.z;
        let u2 = rect.z_max - self.z;
        let v1 = rect.s_min - self.s;
        let v2 = rect.s_max - self.s;
        let area = corner_area(r, u2, v2) - corner_area(r, u1, v2) - corner_area(r, u2, v1)
            + corner_area(r, u1, v1);
        area.clamp(0.0, PI * r * r)
    }
}

/// Antiderivative of the half-chord `sqrt(r² - u²)`.
fn half_chord_integral(r: f64, u: f64) -> f64 {
    let u = u.clamp(-r, r);
    let s = (r * r - u * u).max(0.0).sqrt();
    0.5 * (u * s + r * r * (u / r).clamp(-1.0, 1.0).asin())
}

/// Area of the part of the origin-centred disc of radius `r` with
/// `u <= x` and `v <= y`.
fn corner_area(r: f64, x: f64, y: f64) -> f64 {
    if x <= -r || y <= -r {
        return 0.0;
    }
    let x = x.min(r);
    let y = y.min(r);
    let chord = |p: f64, q: f64| -> f64 {
        // integral of 2·s(u) over [p, q] ∩ [-r, x]
        let q = q.min(x);
        if q <= p {
            0.0
        } else {
            2.0 * (half_chord_integral(r, q) - half_chord_integral(r, p))
        }
    };
    let partial = |p: f64, q: f64| -> f64 {
        // integral of (y + s(u)) over [p, q] ∩ [-r, x]
        let q = q.min(x);
        if q <= p {
            0.0
        } else {
            y * (q - p) + half_chord_integral(r, q) - half_chord_integral(r, p)
        }
    };
    let a = (r * r - y * y).max(0.0).sqrt();
    if y >= 0.0 {
        chord(-r, -a) + partial(-a, a) + chord(a, r)
    } else {
        partial(-a, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wraps_angles() {
        assert_eq!(wrap_deg(-10.0), 350.0);
        assert_eq!(wrap_deg(370.0), 10.0);
        assert_eq!(wrap_deg(-1e-18), 0.0);
        assert_abs_diff_eq!(angle_diff_deg(10.0, 350.0), 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(angle_diff_deg(350.0, 10.0), -20.0, epsilon = 1e-12);
    }

    #[test]
    fn full_disc_inside_rect() {
        let d = Disc {
            z: 0.0,
            s: 0.0,
            radius: 3.0,
        };
        let r = Rect::centered(0.0, 0.0, 10.0, 10.0);
        assert_abs_diff_eq!(d.rect_intersection_area(&r), PI * 9.0, epsilon = 1e-12);
    }

    #[test]
    fn rect_inside_disc() {
        let d = Disc {
            z: 0.0,
            s: 0.0,
            radius: 10.0,
        };
        let r = Rect::centered(1.0, -2.0, 4.0, 3.0);
        assert_abs_diff_eq!(d.rect_intersection_area(&r), 12.0, epsilon = 1e-12);
    }

    #[test]
    fn half_plane_cut() {
        let d = Disc {
            z: 0.0,
            s: 0.0,
            radius: 2.0,
        };
        let r = Rect {
            z_min: 0.0,
            z_max: 5.0,
            s_min: -5.0,
            s_max: 5.0,
        };
        assert_abs_diff_eq!(d.rect_intersection_area(&r), 2.0 * PI, epsilon = 1e-12);
        let q = Rect {
            z_min: 0.0,
            z_max: 5.0,
            s_min: 0.0,
            s_max: 5.0,
        };
        assert_abs_diff_eq!(d.rect_intersection_area(&q), PI, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_is_zero() {
        let d = Disc {
            z: 0.0,
            s: 0.0,
            radius: 1.0,
        };
        let r = Rect::centered(5.0, 5.0, 2.0, 2.0);
        assert_eq!(d.rect_intersection_area(&r), 0.0);
    }
}
