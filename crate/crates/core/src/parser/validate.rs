use std::collections::BTreeSet;

use super::diagnostic::{codes, Diagnostic, Pos};
use super::is_identifier;
use crate::model::{Event, Screenplay, Step, MAX_DEPTH};

/// Checks a screenplay built in memory. Positions are 1:1 since there is no
/// source text; the parser reports the same problems with real positions.
///
/// Returns an empty list iff every invariant holds and every cast role
/// resolves.
pub fn validate(sp: &Screenplay) -> Vec<Diagnostic> {
    let at = Pos::START;
    let mut out = Vec::new();
    let sent = first_bytes_sent(sp);

    for (key, program) in &sp.programs {
        if !is_identifier(&program.role) {
            out.push(Diagnostic::error(
                at,
                codes::RESERVED_NAME,
                format!("role name '{}' is not a valid identifier", program.role),
            ));
        }
        if *key != program.role {
            out.push(Diagnostic::error(
                at,
                codes::DUPLICATE_ROLE,
                format!("program for '{}' is filed under '{key}'", program.role),
            ));
        }
        if program.steps.is_empty() {
            out.push(Diagnostic::error(at, codes::EMPTY_BLOCK, format!("role '{}' has no steps", program.role)));
        }
        let depth = program.depth();
        if depth > MAX_DEPTH {
            out.push(Diagnostic::error(
                at,
                codes::DEPTH,
                format!("role '{}': nesting depth {depth} exceeds the limit of {MAX_DEPTH}", program.role),
            ));
        }
        check_steps(&program.role, &program.steps, &sent, &mut out);
    }

    for (id, role) in &sp.cast {
        if !sp.programs.contains_key(role) {
            out.push(Diagnostic::error(
                at,
                codes::UNDEFINED_ROLE,
                format!("robot {id} is cast as undefined role '{role}'"),
            ));
        }
    }
    if !sp.cast.is_empty() {
        let cast: BTreeSet<&String> = sp.cast.values().collect();
        for role in sp.programs.keys() {
            if !cast.contains(role) {
                out.push(Diagnostic::warning(at, codes::UNCAST_ROLE, format!("role '{role}' is not cast to any robot")));
            }
        }
    }
    out
}

fn check_steps(role: &str, steps: &[Step], sent: &Sent, out: &mut Vec<Diagnostic>) {
    let at = Pos::START;
    for (i, step) in steps.iter().enumerate() {
        match step {
            Step::Act(a) => {
                if a.duration_ms == 0 {
                    out.push(Diagnostic::error(at, codes::BAD_DURATION, format!("role '{role}': duration must be at least 1ms")));
                }
            }
            Step::Repeat { count, body } => {
                if *count == 0 {
                    out.push(Diagnostic::error(at, codes::REPEAT_ZERO, format!("role '{role}': repeat count must be ≥ 1")));
                }
                check_body(role, body, sent, out);
            }
            Step::Until { event, body } => {
                if let Event::Silence { window_ms: 0 } = event {
                    out.push(Diagnostic::error(at, codes::BAD_DURATION, format!("role '{role}': silence window must be at least 1ms")));
                }
                if i + 1 < steps.len() && !can_fire(event, sent) {
                    out.push(unreachable_warning(at, event));
                }
                check_body(role, body, sent, out);
            }
        }
    }
}

fn check_body(role: &str, body: &[Step], sent: &Sent, out: &mut Vec<Diagnostic>) {
    if body.is_empty() {
        out.push(Diagnostic::error(Pos::START, codes::EMPTY_BLOCK, format!("role '{role}': block must contain at least one step")));
    }
    check_steps(role, body, sent, out);
}

/// What the screenplay's own roles ever broadcast.
pub(crate) struct Sent {
    any: bool,
    first: BTreeSet<u8>,
}

pub(crate) fn first_bytes_sent(sp: &Screenplay) -> Sent {
    fn walk(steps: &[Step], s: &mut Sent) {
        for step in steps {
            match step {
                Step::Act(a) => {
                    if let Some(p) = &a.tx {
                        s.any = true;
                        s.first.extend(p.first());
                    }
                }
                Step::Repeat { body, .. } | Step::Until { body, .. } => walk(body, s),
            }
        }
    }
    let mut s = Sent { any: false, first: BTreeSet::new() };
    for p in sp.programs.values() {
        walk(&p.steps, &mut s);
    }
    s
}

/// Whether some role could ever make this event fire.
pub(crate) fn can_fire(event: &Event, sent: &Sent) -> bool {
    match event {
        Event::MessageHeard { filter: None } => sent.any,
        Event::MessageHeard { filter: Some(b) } => sent.first.contains(b),
        Event::Silence { .. } => true,
    }
}

pub(crate) fn unreachable_warning(pos: Pos, event: &Event) -> Diagnostic {
    Diagnostic::warning(
        pos,
        codes::UNREACHABLE,
        format!("steps after 'until {event}' are unreachable: no role sends a matching message"),
    )
}
