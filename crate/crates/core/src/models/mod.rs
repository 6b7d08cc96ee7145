//! Built-in application maps: discrete SIS, AIMD and fixed-assignment
//! interference, plus standard-map checks and trajectory simulation.

pub mod aimd;
pub mod interference;
pub mod simulate;
pub mod sis;
pub mod standard;

pub use aimd::{aimd_residual_bound, AimdModel, AimdStep, ScalarConcave};
pub use interference::{
    Factor, Feasibility, InterferenceConfig, InterferenceEval, InterferenceModel, RoundingMode,
};
pub use simulate::{simulate, Event, Trajectory, TrajectoryRow};
pub use sis::{paper_example, PaperExample, SisBounds, SisConfig, SisConstants, SisModel};
pub use standard::{standard_map_check, PointCheck, StandardReport};
