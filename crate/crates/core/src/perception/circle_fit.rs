//! Least-squares circle fitting in the plane.

/// Fitted circle with RMS geometric residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub rms: f64,
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        *o = det(m) / d;
    }
    Some(out)
}

fn rms_residual(points: &[(f64, f64)], cx: f64, cy: f64, r: f64) -> f64 {
    let ss: f64 = points
        .iter()
        .map(|&(x, y)| ((x - cx).hypot(y - cy) - r).powi(2))
        .sum();
    (ss / points.len() as f64).sqrt()
}

/// Algebraic (Kåsa) fit refined by Gauss-Newton on the geometric distance.
///
/// Returns `None` for fewer than three points or a degenerate layout.
pub fn fit_circle(points: &[(f64, f64)]) -> Option<Circle> {
    if points.len() < 3 {
        return None;
    }
    // centre the data for conditioning
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let local: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x - mx, y - my)).collect();

    // x² + y² + D x + E y + F = 0
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(x, y) in &local {
        let row = [x, y, 1.0];
        let rhs = -(x * x + y * y);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * rhs;
        }
    }
    let [d, e, f] = solve3(ata, atb)?;
    let (mut cx, mut cy) = (-d / 2.0, -e / 2.0);
    let r2 = cx * cx + cy * cy - f;
    if !(r2 > 0.0) {
        return None;
    }
    let mut r = r2.sqrt();

    for _ in 0..50 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for &(x, y) in &local {
            let dist = (x - cx).hypot(y - cy);
            if dist < 1e-12 {
                continue;
            }
            let res = dist - r;
            let jac = [-(x - cx) / dist, -(y - cy) / dist, -1.0];
            for i in 0..3 {
                for j in 0..3 {
                    jtj[i][j] += jac[i] * jac[j];
                }
                jtr[i] -= jac[i] * res;
            }
        }
        let Some(step) = solve3(jtj, jtr) else { break };
        cx += step[0];
        cy += step[1];
        r += step[2];
        if step.iter().map(|s| s.abs()).fold(0.0, f64::max) < 1e-13 * (1.0 + r) {
            break;
        }
    }
    if !(r > 0.0) || !r.is_finite() {
        return None;
    }
    let rms = rms_residual(&local, cx, cy, r);
    Some(Circle {
        cx: cx + mx,
        cy: cy + my,
        radius: r,
        rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn exact_circle() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|k| {
                let a = k as f64 * 0.157;
                (3.0 + 10.0 * a.cos(), -2.0 + 10.0 * a.sin())
            })
            .collect();
        let c = fit_circle(&pts).unwrap();
        assert_abs_diff_eq!(c.cx, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.cy, -2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.radius, 10.0, epsilon = 1e-9);
        assert!(c.rms < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_circle(&[(0.0, 0.0), (1.0, 1.0)]).is_none());
        assert!(fit_circle(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).is_none());
    }

    proptest! {
        #[test]
        fn recovers_random_circles(cx in -50.0..50.0f64, cy in -50.0..50.0f64, r in 0.5..40.0f64, a0 in 0.0..6.0f64) {
            let pts: Vec<(f64, f64)> = (0..12).map(|k| {
                let a = a0 + k as f64 * 0.4;
                (cx + r * a.cos(), cy + r * a.sin())
            }).collect();
            let c = fit_circle(&pts).unwrap();
            prop_assert!((c.cx - cx).abs() < 1e-6 * (1.0 + r));
            prop_assert!((c.cy - cy).abs() < 1e-6 * (1.0 + r));
            prop_assert!((c.radius - r).abs() < 1e-6 * (1.0 + r));
        }
    }
}
