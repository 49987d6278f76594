use serde::{Deserialize, Serialize};

use super::MissionError;
use crate::sensors::RobotPose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pass {
    Pass1CastIron,
    Pass2Lined,
}

impl Pass {
    pub fn number(&self) -> u8 {
        match self {
            Pass::Pass1CastIron => 1,
            Pass::Pass2Lined => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Traverse,
    Characterize,
    Machine,
    Relocate,
    Done,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Traverse => "traverse",
            Phase::Characterize => "characterize",
            Phase::Machine => "machine",
            Phase::Relocate => "relocate",
            Phase::Done => "done",
        }
    }
}

/// Phase, pose and clock of a running pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionState {
    pub pass: Pass,
    pub phase: Phase,
    /// True pose of the robot.
    pub pose: RobotPose,
    /// µs since the start of the pass.
    pub clock_us: i64,
}

impl MissionState {
    pub fn new(pass: Pass) -> Self {
        MissionState {
            pass,
            phase: Phase::Traverse,
            pose: RobotPose::default(),
            clock_us: 0,
        }
    }

    pub fn can_enter(&self, next: Phase) -> bool {
        use Phase::*;
        match (self.pass, self.phase, next) {
            (_, Done, _) => false,
            (Pass::Pass1CastIron, Traverse, Characterize)
            | (Pass::Pass2Lined, Traverse, Relocate) => true,
            (_, Traverse, Done) => true,
            (_, Characterize | Relocate, Machine | Traverse) => true,
            (_, Machine, Traverse) => true,
            _ => false,
        }
    }

    pub fn enter(&mut self, next: Phase) -> Result<(), MissionError> {
        if !self.can_enter(next) {
            return Err(MissionError::IllegalTransition {
                from: self.phase,
                to: next,
            });
        }
        self.phase = next;
        Ok(())
    }

    pub fn advance_clock(&mut self, seconds: f64) {
        self.clock_us += (seconds * 1e6).round() as i64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass1_sequence() {
        let mut s = MissionState::new(Pass::Pass1CastIron);
        for p in [
            Phase::Characterize,
            Phase::Machine,
            Phase::Traverse,
            Phase::Characterize,
            Phase::Traverse,
            Phase::Done,
        ] {
            s.enter(p).unwrap();
        }
        assert!(s.enter(Phase::Traverse).is_err());
    }

    #[test]
    fn illegal_orders_rejected() {
        let mut s = MissionState::new(Pass::Pass1CastIron);
        assert!(s.enter(Phase::Machine).is_err());
        assert!(s.enter(Phase::Relocate).is_err());
        let mut s = MissionState::new(Pass::Pass2Lined);
        assert!(s.enter(Phase::Characterize).is_err());
        s.enter(Phase::Relocate).unwrap();
        assert!(s.enter(Phase::Done).is_err());
        s.enter(Phase::Machine).unwrap();
        assert!(s.enter(Phase::Machine).is_err());
    }
}
