//! Deterministic discrete-time simulation of a robot population.
//!
//! Each tick of `tick_ms` runs, in order: message delivery, event
//! evaluation, one executor step per robot, kinematics over the tick, and
//! trace emission. Every random draw comes from one ChaCha8 stream seeded
//! by the scene seed and is taken in robot-id order, so a run is a pure
//! function of its [`SceneConfig`].

mod physics;
mod scene;
mod trace;
mod world;

pub use physics::{advance, wrap_angle, Arena, PhysicsParams, Pose};
pub use scene::{Behavior, RobotEntry, RobotSpec, SceneConfig, SceneError, SceneFile, DEFAULT_TICK_MS};
pub use trace::{is_ordered, Trace, TraceEvent, TraceKind, TraceParseError};
pub use world::{
    run, run_with, spawn_world, spawn_world_with, step_world, ExecMode, Executor, Reception, RobotState, World,
};
