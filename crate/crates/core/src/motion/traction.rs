use super::MotionError;

/// Rated traction points `(speed m/s, force N)`.
const RATED: [(f64, f64); 2] = [(0.05, 510.0), (0.10, 370.0)];

/// Traction force available at `speed`, interpolated between the rated
/// points and clamped outside them.
pub fn available_traction(speed: f64) -> f64 {
    let [(s0, f0), (s1, f1)] = RATED;
    if speed <= s0 {
        f0
    } else if speed >= s1 {
        f1
    } else {
        f0 + (speed - s0) / (s1 - s0) * (f1 - f0)
    }
}

pub fn traction_check(speed: f64, required_force: f64) -> Result<bool, MotionError> {
    if !(speed > 0.0) {
        return Err(MotionError::Parameter(format!(
            "speed {speed} m/s must be positive"
        )));
    }
    Ok(required_force <= available_traction(speed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rated_points() {
        assert!(traction_check(0.10, 370.0).unwrap());
        assert!(traction_check(0.05, 510.0).unwrap());
        assert!(!traction_check(0.10, 400.0).unwrap());
        assert_eq!(available_traction(0.075), 440.0);
        assert_eq!(available_traction(0.2), 370.0);
        assert!(traction_check(0.0, 1.0).is_err());
    }
}
