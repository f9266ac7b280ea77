//! Planning and execution engine for robotic disassembly and assembly.
//!
//! The pipeline runs from a relational assembly model through sampled
//! disassembly spaces and a symbolic plan of manipulation primitives, to a
//! runtime decomposition into skill primitives that a simulated robot
//! executes under a switching position / force / visual-servoing controller.

pub mod control;
pub mod dspace;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod model;
pub mod planner;
pub mod skill;

pub use error::{
    ControlError, DecomposeError, ErrorType, ExecutionFailed, ModelError, PlanError, SpaceError,
};
pub use model::{AssemblyModel, Component, Semantic, Ssr, SsrKind, Tool};
pub use planner::{ManipulationPrimitive, MpKind, Phase, Plan, TaskPlan};
