//! The action vocabulary of a Kilobot screenplay.
//!
//! A Kilobot has four things a program can drive: two vibration motors
//! (which together give four drive modes), an RGB LED and an infrared
//! transmitter. An [`Action`] fixes all of them for a duration; [`Step`]s
//! compose actions into counted and event-terminated loops.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest payload a single IR frame carries.
pub const MAX_PAYLOAD: usize = 9;

/// Deepest allowed nesting of `repeat`/`until` blocks.
pub const MAX_DEPTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("led channel value {0} out of range 0..=3")]
    ChannelOutOfRange(u8),
    #[error("payload of {0} bytes exceeds the {MAX_PAYLOAD}-byte frame")]
    PayloadTooLong(usize),
    #[error("duration must be at least 1 ms")]
    ZeroDuration,
    #[error("silence window must be at least 1 ms")]
    ZeroWindow,
    #[error("repeat count must be at least 1")]
    ZeroRepeat,
    #[error("block body must not be empty")]
    EmptyBody,
}

/// Drive mode produced by the two vibration motors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotorCommand {
    #[default]
    Stop,
    Straight,
    TurnLeft,
    TurnRight,
}

impl MotorCommand {
    pub fn is_moving(self) -> bool {
        self != MotorCommand::Stop
    }

    /// Keyword used in screenplay text and traces.
    pub fn keyword(self) -> &'static str {
        match self {
            MotorCommand::Stop => "stop",
            MotorCommand::Straight => "straight",
            MotorCommand::TurnLeft => "left",
            MotorCommand::TurnRight => "right",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "stop" => MotorCommand::Stop,
            "straight" => MotorCommand::Straight,
            "left" => MotorCommand::TurnLeft,
            "right" => MotorCommand::TurnRight,
            _ => return None,
        })
    }
}

impl fmt::Display for MotorCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// LED color with 2-bit channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ColorState {
    r: u8,
    g: u8,
    b: u8,
}

impl ColorState {
    pub const OFF: ColorState = ColorState { r: 0, g: 0, b: 0 };
    pub const RED: ColorState = ColorState { r: 3, g: 0, b: 0 };
    pub const GREEN: ColorState = ColorState { r: 0, g: 3, b: 0 };
    pub const BLUE: ColorState = ColorState { r: 0, g: 0, b: 3 };
    pub const WHITE: ColorState = ColorState { r: 3, g: 3, b: 3 };

    pub fn new(r: u8, g: u8, b: u8) -> Result<Self, ModelError> {
        for c in [r, g, b] {
            if c > 3 {
                return Err(ModelError::ChannelOutOfRange(c));
            }
        }
        Ok(ColorState { r, g, b })
    }

    pub fn r(self) -> u8 {
        self.r
    }
    pub fn g(self) -> u8 {
        self.g
    }
    pub fn b(self) -> u8 {
        self.b
    }

    pub fn is_off(self) -> bool {
        self == ColorState::OFF
    }

    /// 8-bit RGB for display, mapping each 2-bit level linearly onto 0..=255.
    pub fn to_rgb8(self) -> [u8; 3] {
        [self.r * 85, self.g * 85, self.b * 85]
    }
}

impl fmt::Display for ColorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.r, self.g, self.b)
    }
}

impl Serialize for ColorState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.r, self.g, self.b].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ColorState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [r, g, b] = <[u8; 3]>::deserialize(d)?;
        ColorState::new(r, g, b).map_err(serde::de::Error::custom)
    }
}

/// Bytes broadcast over IR, at most [`MAX_PAYLOAD`] long.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MessagePayload(Vec<u8>);

impl MessagePayload {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, ModelError> {
        let bytes = bytes.into();
        if bytes.len() > MAX_PAYLOAD {
            return Err(ModelError::PayloadTooLong(bytes.len()));
        }
        Ok(MessagePayload(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn first(&self) -> Option<u8> {
        self.0.first().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for MessagePayload {
    /// Space separated lowercase hex, `01 2a`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

/// A complete actuator configuration held for `duration_ms`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action {
    pub motor: MotorCommand,
    pub led: ColorState,
    pub tx: Option<MessagePayload>,
    pub duration_ms: u32,
}

impl Action {
    pub fn new(
        motor: MotorCommand,
        led: ColorState,
        tx: Option<MessagePayload>,
        duration_ms: u32,
    ) -> Result<Self, ModelError> {
        if duration_ms == 0 {
            return Err(ModelError::ZeroDuration);
        }
        Ok(Action { motor, led, tx, duration_ms })
    }

    /// The state a program rests in once it has finished: motors off, LED off, silent.
    pub fn idle() -> Self {
        Action { motor: MotorCommand::Stop, led: ColorState::OFF, tx: None, duration_ms: 1 }
    }

    /// True when the actuator outputs (ignoring duration) match.
    pub fn same_outputs(&self, other: &Action) -> bool {
        self.motor == other.motor && self.led == other.led && self.tx == other.tx
    }
}

/// Something a robot can sense through its IR receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    /// Any reception this tick, or one whose first byte equals the filter.
    MessageHeard { filter: Option<u8> },
    /// No reception for at least `window_ms`.
    Silence { window_ms: u32 },
}

impl Event {
    pub fn silence(window_ms: u32) -> Result<Self, ModelError> {
        if window_ms == 0 {
            return Err(ModelError::ZeroWindow);
        }
        Ok(Event::Silence { window_ms })
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::MessageHeard { filter: None } => f.write_str("message"),
            Event::MessageHeard { filter: Some(b) } => write!(f, "message first 0x{b:02x}"),
            Event::Silence { window_ms } => write!(f, "silence {window_ms}ms"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Step {
    Act(Action),
    Repeat { count: u32, body: Vec<Step> },
    Until { event: Event, body: Vec<Step> },
}

impl Step {
    /// Number of `Act` nodes in this subtree.
    pub fn action_count(&self) -> usize {
        match self {
            Step::Act(_) => 1,
            Step::Repeat { body, .. } | Step::Until { body, .. } => {
                body.iter().map(Step::action_count).sum()
            }
        }
    }

    /// Block nesting depth: 0 for an action, 1 + deepest child for a block.
    pub fn depth(&self) -> usize {
        match self {
            Step::Act(_) => 0,
            Step::Repeat { body, .. } | Step::Until { body, .. } => {
                1 + body.iter().map(Step::depth).max().unwrap_or(0)
            }
        }
    }

    fn check(&self) -> Result<(), ModelError> {
        match self {
            Step::Act(a) if a.duration_ms == 0 => Err(ModelError::ZeroDuration),
            Step::Act(_) => Ok(()),
            Step::Repeat { count, body } => {
                if *count == 0 {
                    return Err(ModelError::ZeroRepeat);
                }
                check_body(body)
            }
            Step::Until { event, body } => {
                if let Event::Silence { window_ms: 0 } = event {
                    return Err(ModelError::ZeroWindow);
                }
                check_body(body)
            }
        }
    }
}

fn check_body(body: &[Step]) -> Result<(), ModelError> {
    if body.is_empty() {
        return Err(ModelError::EmptyBody);
    }
    body.iter().try_for_each(Step::check)
}

/// The step list one role follows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionProgram {
    pub role: String,
    pub steps: Vec<Step>,
}

impl ActionProgram {
    pub fn new(role: impl Into<String>, steps: Vec<Step>) -> Self {
        ActionProgram { role: role.into(), steps }
    }

    pub fn depth(&self) -> usize {
        self.steps.iter().map(Step::depth).max().unwrap_or(0)
    }

    pub fn action_count(&self) -> usize {
        self.steps.iter().map(Step::action_count).sum()
    }

    /// Local structural checks (counts, durations, non-empty bodies). Depth
    /// is checked by the lowering and by the validator.
    pub fn check(&self) -> Result<(), ModelError> {
        self.steps.iter().try_for_each(Step::check)
    }

    /// Distinct events referenced anywhere in the program, in sorted order.
    pub fn events(&self) -> Vec<Event> {
        fn walk(steps: &[Step], out: &mut Vec<Event>) {
            for s in steps {
                match s {
                    Step::Act(_) => {}
                    Step::Repeat { body, .. } => walk(body, out),
                    Step::Until { event, body } => {
                        out.push(*event);
                        walk(body, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.steps, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

/// A set of role programs plus the casting of robots into roles.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Screenplay {
    pub programs: BTreeMap<String, ActionProgram>,
    pub cast: BTreeMap<u32, String>,
}

impl Screenplay {
    pub fn program(&self, role: &str) -> Option<&ActionProgram> {
        self.programs.get(role)
    }

    pub fn insert(&mut self, program: ActionProgram) -> Option<ActionProgram> {
        self.programs.insert(program.role.clone(), program)
    }
}
