//! Deterministic multi-lane highway world.
//!
//! Agent vehicles execute discrete meta-actions through proportional
//! lateral/longitudinal controllers; scripted human-driven vehicles follow
//! an intelligent-driver car-following model with incentive-based lane
//! changes. One decision tick integrates a fixed number of simulation
//! substeps with collision detection at every substep.

mod behavior;
mod config;
mod reward;
mod trace;
mod vehicle;
mod world;

pub use behavior::{idm_acceleration, BehaviorPreset};
pub use config::{DensityMode, RoadConfig, ScenarioConfig};
pub use reward::{global_reward, reward, RewardWeights};
pub use trace::{trace_header, TraceRow};
pub use vehicle::{VehicleKind, VehicleState};
pub use world::{apply_meta_action, init_scenario, StepOutcome, World};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("stepping a terminated world")]
    Terminated,
    #[error("expected {expected} agent actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("scenario file line {line}: {message}")]
    ScenarioFile { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Decision frequency is 1 Hz; each decision tick integrates this many
/// simulation substeps.
pub const SIMULATION_SUBSTEPS: usize = 15;
/// Substep integration interval in seconds.
pub const SUBSTEP_DT: f64 = 1.0 / SIMULATION_SUBSTEPS as f64;
/// Vehicle footprint used for collision detection, meters.
pub const VEHICLE_LENGTH: f64 = 5.0;
pub const VEHICLE_WIDTH: f64 = 2.0;
