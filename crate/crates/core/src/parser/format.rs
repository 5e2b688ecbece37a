use std::fmt::Write;

use crate::model::{Action, ColorState, MotorCommand, Screenplay, Step};

/// Canonical text: one step per line, two spaces per nesting level,
/// durations in `ms`, roles in name order separated by a blank line.
/// The cast is not part of the text format.
pub fn format_screenplay(sp: &Screenplay) -> String {
    let mut out = String::new();
    for (i, program) in sp.programs.values().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "role {} {{", program.role).unwrap();
        steps(&mut out, &program.steps, 1);
        out.push_str("}\n");
    }
    out
}

fn steps(out: &mut String, list: &[Step], level: usize) {
    for step in list {
        let pad = "  ".repeat(level);
        match step {
            Step::Act(a) => writeln!(out, "{pad}{}", action(a)).unwrap(),
            Step::Repeat { count, body } => {
                writeln!(out, "{pad}repeat {count} {{").unwrap();
                steps(out, body, level + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
            Step::Until { event, body } => {
                writeln!(out, "{pad}until {event} {{").unwrap();
                steps(out, body, level + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
        }
    }
}

fn action(a: &Action) -> String {
    let mut atoms = Vec::new();
    if a.motor != MotorCommand::Stop {
        atoms.push(format!("move {}", a.motor));
    }
    if a.led != ColorState::OFF {
        atoms.push(format!("led {}", a.led));
    }
    if let Some(p) = &a.tx {
        let bytes: Vec<String> = p.as_bytes().iter().map(|b| format!("0x{b:02x}")).collect();
        atoms.push(format!("send {}", bytes.join(" ")));
    }
    if atoms.is_empty() {
        atoms.push("move stop".into());
    }
    format!("{} for {}ms", atoms.join(" "), a.duration_ms)
}
