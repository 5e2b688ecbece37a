use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Declaration order is the tie-break order within one robot and tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceKind {
    MotorSet,
    LedSet,
    Tx,
    Rx,
    EventFired,
    StateEnter,
    BuzzOn,
    BuzzOff,
}

impl TraceKind {
    pub const ALL: [TraceKind; 8] = [
        TraceKind::MotorSet,
        TraceKind::LedSet,
        TraceKind::Tx,
        TraceKind::Rx,
        TraceKind::EventFired,
        TraceKind::StateEnter,
        TraceKind::BuzzOn,
        TraceKind::BuzzOff,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::MotorSet => "MOTOR_SET",
            TraceKind::LedSet => "LED_SET",
            TraceKind::Tx => "TX",
            TraceKind::Rx => "RX",
            TraceKind::EventFired => "EVENT_FIRED",
            TraceKind::StateEnter => "STATE_ENTER",
            TraceKind::BuzzOn => "BUZZ_ON",
            TraceKind::BuzzOff => "BUZZ_OFF",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TraceKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        TraceKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub t_ms: u64,
    pub robot_id: u32,
    pub kind: TraceKind,
    pub payload: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}", self.t_ms, self.robot_id, self.kind, self.payload)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("trace line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

/// Everything a run observed. `notes` carries warnings (such as robots
/// overlapping) that are not actuator events and stay out of the
/// serialized form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub notes: Vec<String>,
}

impl Trace {
    /// One tab-separated line per event, LF-terminated.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Vec<TraceEvent>, TraceParseError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |message: String| TraceParseError { line: i + 1, message };
            let mut parts = line.splitn(4, '\t');
            let (Some(t), Some(id), Some(kind), Some(payload)) = (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(err("expected four tab-separated fields".into()));
            };
            out.push(TraceEvent {
                t_ms: t.parse().map_err(|_| err(format!("bad time '{t}'")))?,
                robot_id: id.parse().map_err(|_| err(format!("bad robot id '{id}'")))?,
                kind: kind.parse().map_err(|_| err(format!("unknown kind '{kind}'")))?,
                payload: payload.to_string(),
            });
        }
        Ok(out)
    }

    pub fn of(&self, robot_id: u32, kind: TraceKind) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.robot_id == robot_id && e.kind == kind)
    }
}

/// True when times never decrease and equal times are ordered by robot id,
/// then kind.
pub fn is_ordered(events: &[TraceEvent]) -> bool {
    events.windows(2).all(|w| (w[0].t_ms, w[0].robot_id, w[0].kind) <= (w[1].t_ms, w[1].robot_id, w[1].kind))
}
