use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::physics::{Arena, PhysicsParams};
use crate::automaton::LowerError;
use crate::behaviors::ControllerSpec;
use crate::model::Screenplay;
use crate::parser::{self, Diagnostic};

pub const DEFAULT_TICK_MS: u32 = 31;

#[derive(Debug, Clone, PartialEq)]
pub enum Behavior {
    /// Runs the screenplay program of this role.
    Role(String),
    Controller(ControllerSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotSpec {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub heading_rad: f64,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub arena: Arena,
    pub robots: Vec<RobotSpec>,
    pub screenplay: Option<Screenplay>,
    pub physics: PhysicsParams,
    pub seed: u64,
    pub duration_ms: u32,
    pub tick_ms: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("scene has no robots")]
    EmptyScene,
    #[error("robot id {0} is used more than once")]
    DuplicateRobotId(u32),
    #[error("robot {id} at ({x}, {y}) is outside the arena")]
    OutOfArena { id: u32, x: f64, y: f64 },
    #[error("bad timing: {0}")]
    BadTiming(String),
    #[error("bad physics: {0}")]
    BadPhysics(String),
    #[error("robot {0} plays a role but the scene has no screenplay")]
    NoScreenplay(u32),
    #[error("screenplay has errors:\n{}", render_diagnostics(.0))]
    Screenplay(Vec<Diagnostic>),
    #[error("robot {id}: {message}")]
    BadController { id: u32, message: String },
    #[error("role '{role}' cannot be lowered: {source}")]
    Lower { role: String, source: LowerError },
    #[error("robot {id} names both a role and a controller, or neither")]
    AmbiguousBehavior { id: u32 },
    #[error("scene file: {0}")]
    Format(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

impl SceneConfig {
    pub fn new(arena: Arena, robots: Vec<RobotSpec>) -> Self {
        SceneConfig {
            arena,
            robots,
            screenplay: None,
            physics: PhysicsParams::default(),
            seed: 0,
            duration_ms: 10_000,
            tick_ms: DEFAULT_TICK_MS,
        }
    }

    /// The screenplay with its cast filled in from the robots playing roles.
    pub fn cast_screenplay(&self) -> Option<Screenplay> {
        let mut sp = self.screenplay.clone()?;
        sp.cast = self
            .robots
            .iter()
            .filter_map(|r| match &r.behavior {
                Behavior::Role(role) => Some((r.id, role.clone())),
                Behavior::Controller(_) => None,
            })
            .collect();
        Some(sp)
    }

    /// Checks every invariant; returns screenplay warnings on success.
    pub fn validate(&self) -> Result<Vec<Diagnostic>, SceneError> {
        if self.robots.is_empty() {
            return Err(SceneError::EmptyScene);
        }
        if !(self.arena.width > 0.0 && self.arena.height > 0.0) {
            return Err(SceneError::Format("arena width and height must be positive".into()));
        }
        let mut ids = BTreeSet::new();
        for r in &self.robots {
            if !ids.insert(r.id) {
                return Err(SceneError::DuplicateRobotId(r.id));
            }
            if !self.arena.contains(r.x, r.y) || !r.heading_rad.is_finite() {
                return Err(SceneError::OutOfArena { id: r.id, x: r.x, y: r.y });
            }
        }
        if self.tick_ms == 0 {
            return Err(SceneError::BadTiming("tick_ms must be positive".into()));
        }
        if self.duration_ms < self.tick_ms {
            return Err(SceneError::BadTiming(format!(
                "duration_ms ({}) is shorter than tick_ms ({})",
                self.duration_ms, self.tick_ms
            )));
        }
        self.physics.check().map_err(SceneError::BadPhysics)?;
        for r in &self.robots {
            match &r.behavior {
                Behavior::Role(_) if self.screenplay.is_none() => return Err(SceneError::NoScreenplay(r.id)),
                Behavior::Role(_) => {}
                Behavior::Controller(c) => {
                    c.check().map_err(|message| SceneError::BadController { id: r.id, message })?;
                    if let ControllerSpec::Orbit { anchor_id, .. } = c {
                        if *anchor_id == r.id || !ids.contains(anchor_id) {
                            return Err(SceneError::BadController {
                                id: r.id,
                                message: format!("orbit anchor {anchor_id} is not another robot in the scene"),
                            });
                        }
                    }
                }
            }
        }
        match self.cast_screenplay() {
            None => Ok(Vec::new()),
            Some(sp) => {
                let diags = parser::validate(&sp);
                if parser::has_errors(&diags) {
                    Err(SceneError::Screenplay(diags))
                } else {
                    Ok(diags)
                }
            }
        }
    }

    /// Reads a scene document (see [`SceneFile`]). A `screenplay_file` is
    /// resolved against `base_dir`.
    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self, SceneError> {
        let file: SceneFile = serde_json::from_str(text).map_err(|e| SceneError::Format(e.to_string()))?;
        file.into_config(base_dir)
    }

    pub fn load(path: &Path) -> Result<Self, SceneError> {
        let text = fs::read_to_string(path)
            .map_err(|e| SceneError::Io { path: path.display().to_string(), message: e.to_string() })?;
        SceneConfig::from_json(&text, path.parent())
    }
}

/// The on-disk form of a scene, a JSON object.
///
/// ```json
/// {
///   "arena": { "width": 400, "height": 300 },
///   "screenplay": "role a { led red for 500ms }",
///   "robots": [ { "id": 1, "x": 0, "y": 0, "heading_rad": 0, "role": "a" } ],
///   "physics": { "comm_radius": 150 },
///   "seed": 7, "duration_ms": 9000, "tick_ms": 25
/// }
/// ```
///
/// Each robot names either a `role` or a `controller`. The screenplay may
/// instead live in a separate file named by `screenplay_file`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub arena: Arena,
    pub robots: Vec<RobotEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screenplay: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screenplay_file: Option<String>,
    #[serde(default)]
    pub physics: PhysicsParams,
    #[serde(default)]
    pub seed: u64,
    pub duration_ms: u32,
    #[serde(default = "default_tick")]
    pub tick_ms: u32,
}

fn default_tick() -> u32 {
    DEFAULT_TICK_MS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotEntry {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub heading_rad: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerSpec>,
}

impl SceneFile {
    pub fn into_config(self, base_dir: Option<&Path>) -> Result<SceneConfig, SceneError> {
        let source = match (self.screenplay, self.screenplay_file) {
            (Some(_), Some(_)) => {
                return Err(SceneError::Format("give either screenplay or screenplay_file, not both".into()))
            }
            (Some(s), None) => Some(s),
            (None, Some(f)) => {
                let path = base_dir.map_or_else(|| Path::new(&f).to_path_buf(), |d| d.join(&f));
                Some(
                    fs::read_to_string(&path)
                        .map_err(|e| SceneError::Io { path: path.display().to_string(), message: e.to_string() })?,
                )
            }
            (None, None) => None,
        };
        let screenplay = source.map(|s| parser::parse_screenplay(&s)).transpose().map_err(SceneError::Screenplay)?;
        let robots = self
            .robots
            .into_iter()
            .map(|r| {
                let behavior = match (r.role, r.controller) {
                    (Some(role), None) => Behavior::Role(role),
                    (None, Some(c)) => Behavior::Controller(c),
                    _ => return Err(SceneError::AmbiguousBehavior { id: r.id }),
                };
                Ok(RobotSpec { id: r.id, x: r.x, y: r.y, heading_rad: r.heading_rad, behavior })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SceneConfig {
            arena: self.arena,
            robots,
            screenplay,
            physics: self.physics,
            seed: self.seed,
            duration_ms: self.duration_ms,
            tick_ms: self.tick_ms,
        })
    }
}
