use serde::{Deserialize, Serialize};

use super::MotionError;
use crate::geometry::wrap_deg;
use crate::sensors::ROLL_LIMIT_DEG;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationPlan {
    pub from: f64,
    pub to: f64,
    /// Signed travel, degrees.
    pub travel: f64,
}

impl RotationPlan {
    /// +1, -1 or 0.
    pub fn direction(&self) -> i8 {
        if self.travel > 0.0 {
            1
        } else if self.travel < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Roll after a fraction `u ∈ [0, 1]` of the move.
    pub fn at(&self, u: f64) -> f64 {
        self.from + u.clamp(0.0, 1.0) * self.travel
    }
}

fn check(roll: f64) -> Result<(), MotionError> {
    if (0.0..=ROLL_LIMIT_DEG).contains(&roll) {
        Ok(())
    } else {
        Err(MotionError::RotationRange(roll))
    }
}

/// Move between two rolls of the limited stage.
///
/// The stage cannot wrap through its hard stop, so the only admissible
/// path is the direct one.
pub fn rotate_plan(current: f64, target: f64) -> Result<RotationPlan, MotionError> {
    check(current)?;
    check(target)?;
    Ok(RotationPlan {
        from: current,
        to: target,
        travel: target - current,
    })
}

/// Roll in `[0, 400]` reaching pipe angle `theta` with the least travel from `current`.
pub fn nearest_roll_for(current: f64, theta: f64) -> Result<f64, MotionError> {
    check(current)?;
    let base = wrap_deg(theta);
    [base, base + 360.0]
        .into_iter()
        .filter(|r| *r <= ROLL_LIMIT_DEG)
        .min_by(|a, b| (a - current).abs().total_cmp(&(b - current).abs()))
        .ok_or(MotionError::RotationRange(theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn no_wrap_through_stop() {
        assert_eq!(rotate_plan(10.0, 350.0).unwrap().travel, 340.0);
        let p = rotate_plan(390.0, 30.0).unwrap();
        assert_eq!(p.travel, -360.0);
        assert_eq!(p.direction(), -1);
        assert_eq!(
            rotate_plan(401.0 - 1.0, 401.0),
            Err(MotionError::RotationRange(401.0))
        );
    }

    #[test]
    fn nearest_equivalent_roll() {
        assert_eq!(nearest_roll_for(390.0, 20.0).unwrap(), 380.0);
        assert_eq!(nearest_roll_for(10.0, 20.0).unwrap(), 20.0);
        assert_eq!(nearest_roll_for(200.0, 350.0).unwrap(), 350.0);
    }

    proptest! {
        #[test]
        fn plans_stay_in_range(a in 0.0..=400.0f64, b in 0.0..=400.0f64, u in 0.0..=1.0f64) {
            let r = rotate_plan(a, b).unwrap().at(u);
            prop_assert!((0.0..=400.0).contains(&r));
        }
    }
}
