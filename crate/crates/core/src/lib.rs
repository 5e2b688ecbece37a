//! Screenplay compiler and deterministic swarm simulator for Kilobot-class
//! robots.
//!
//! A screenplay assigns each role a timed action program. Programs are
//! parsed ([`parser`]), lowered to timed automata ([`automaton`]), and then
//! either emitted as C against the kilolib API ([`codegen`]) or run in a
//! simulated arena ([`sim`]) next to the built-in scene controllers
//! ([`behaviors`]). Simulator traces can be drawn to frames ([`render`]).

pub mod automaton;
pub mod behaviors;
pub mod codegen;
pub mod exec;
pub mod interp;
pub mod model;
pub mod parser;
pub mod render;
pub mod sim;

pub use automaton::{lower, lower_with, Automaton, Cursor, LowerError, LowerOptions, RepeatEncoding};
pub use exec::{Cause, Entry, Observed};
pub use interp::TreeWalker;
pub use model::{Action, ActionProgram, ColorState, Event, MessagePayload, MotorCommand, Screenplay, Step};
pub use parser::{format_screenplay, parse_screenplay, validate, Diagnostic, Severity};
