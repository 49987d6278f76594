//! Simulator and algorithm library for an in-pipe rehabilitation robot:
//! branch detection and characterisation in cast iron, eddy-current
//! relocation through an HDPE liner, delta-head machining and the two-pass
//! mission that ties them together.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsp;
pub mod export;
pub mod geometry;
pub mod mission;
pub mod motion;
pub mod perception;
pub mod rng;
pub mod sensors;
pub mod world;

pub use mission::{BranchMap, MissionConfig, MissionError, MissionLog};
pub use motion::{MachiningDefaults, MotionError, Toolpath};
pub use perception::{BranchDetection, HoleCharacterization, PerceptionError, PointCloud};
pub use sensors::{RobotPose, SensorDefaults, SensorError};
pub use world::{build_scenario, templates, PipeScenario, ScenarioConfig, WorldError};
