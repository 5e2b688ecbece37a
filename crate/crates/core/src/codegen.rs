//! C emission against the kilolib API.
//!
//! The output is one translation unit: a header comment (tool name and a
//! digest of the input), `#include "kilolib.h"`, payload and state tables,
//! the helper routines, `setup`, `loop`, the message callbacks and `main`.
//! States are dispatched through an integer `switch` on every loop pass.
//! Up to [`TABLE_THRESHOLD`] states the per-state outputs are inlined in a
//! `switch`; above it they come from `static const` tables.

use std::collections::BTreeMap;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::automaton::{Automaton, Target, Trigger};
use crate::model::{Event, MotorCommand, MAX_PAYLOAD};

pub const TOOL_NAME: &str = "kiloscript";

/// States above this count get table-driven outputs.
pub const TABLE_THRESHOLD: usize = 64;

/// Every external identifier emitted code may use. The companion header
/// must declare all of them.
pub const KILOLIB_SYMBOLS: &[&str] = &[
    "kilo_init",
    "kilo_start",
    "kilo_ticks",
    "kilo_message_rx",
    "kilo_message_tx",
    "kilo_straight_left",
    "kilo_straight_right",
    "kilo_turn_left",
    "kilo_turn_right",
    "set_motors",
    "spinup_motors",
    "set_color",
    "RGB",
    "message_t",
    "distance_measurement_t",
    "message_crc",
    "NORMAL",
    "uint8_t",
    "uint16_t",
    "uint32_t",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodegenOptions {
    pub ticks_per_second: u32,
    pub tx_period_ms: u32,
    pub emit_counters: bool,
}

impl Default for CodegenOptions {
    fn default() -> Self {
        CodegenOptions { ticks_per_second: 32, tx_period_ms: 500, emit_counters: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("unsupported automaton: {0}")]
    UnsupportedAutomaton(String),
    #[error("invalid options: {0}")]
    InvalidOptions(&'static str),
}

/// `round(ms * tps / 1000)`, halves rounding up.
pub fn ms_to_ticks(ms: u32, ticks_per_second: u32) -> u32 {
    let scaled = ms as u64 * ticks_per_second as u64;
    ((scaled * 2 + 1000) / 2000).min(u32::MAX as u64) as u32
}

/// Hex SHA-256 prefix identifying the automaton and options.
pub fn input_digest(a: &Automaton, opts: &CodegenOptions) -> String {
    let mut h = Sha256::new();
    h.update(a.to_string().as_bytes());
    h.update(format!("tps={} tx={} counters={}\n", opts.ticks_per_second, opts.tx_period_ms, opts.emit_counters));
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn emit_c(a: &Automaton, opts: &CodegenOptions) -> Result<String, CodegenError> {
    if opts.ticks_per_second == 0 {
        return Err(CodegenError::InvalidOptions("ticks_per_second must be at least 1"));
    }
    if opts.tx_period_ms == 0 {
        return Err(CodegenError::InvalidOptions("tx_period_ms must be at least 1"));
    }
    if a.uses_counters() && !opts.emit_counters {
        return Err(CodegenError::UnsupportedAutomaton(format!(
            "role '{}' needs {} loop counter(s) but counter emission is disabled",
            a.role, a.counters
        )));
    }
    Ok(Emitter::new(a, opts).emit())
}

struct Emitter<'a> {
    a: &'a Automaton,
    opts: &'a CodegenOptions,
    out: String,
    /// Distinct payloads in first-use order, padded to the frame size.
    payloads: Vec<[u8; MAX_PAYLOAD]>,
    slot_of: Vec<Option<usize>>,
    events: Vec<Event>,
    filters: Vec<u8>,
    tables: bool,
}

fn motion_name(m: MotorCommand) -> &'static str {
    match m {
        MotorCommand::Stop => "KS_STOP",
        MotorCommand::Straight => "KS_STRAIGHT",
        MotorCommand::TurnLeft => "KS_LEFT",
        MotorCommand::TurnRight => "KS_RIGHT",
    }
}

impl<'a> Emitter<'a> {
    fn new(a: &'a Automaton, opts: &'a CodegenOptions) -> Self {
        let mut payloads: Vec<[u8; MAX_PAYLOAD]> = Vec::new();
        let mut index: BTreeMap<[u8; MAX_PAYLOAD], usize> = BTreeMap::new();
        let slot_of = a
            .states
            .iter()
            .map(|s| {
                s.action.tx.as_ref().map(|p| {
                    let mut frame = [0u8; MAX_PAYLOAD];
                    frame[..p.len()].copy_from_slice(p.as_bytes());
                    *index.entry(frame).or_insert_with(|| {
                        payloads.push(frame);
                        payloads.len() - 1
                    })
                })
            })
            .collect();
        let events = a.events();
        let filters = events
            .iter()
            .filter_map(|e| match e {
                Event::MessageHeard { filter: Some(b) } => Some(*b),
                _ => None,
            })
            .collect();
        Emitter { a, opts, out: String::new(), payloads, slot_of, events, filters, tables: a.states.len() > TABLE_THRESHOLD }
    }

    fn line(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn ticks(&self, ms: u32) -> u32 {
        ms_to_ticks(ms, self.opts.ticks_per_second)
    }

    fn slot_expr(&self, state: usize) -> String {
        self.slot_of[state].map_or("KS_NO_TX".to_string(), |s| s.to_string())
    }

    fn color_expr(&self, state: usize) -> String {
        let c = self.a.states[state].action.led;
        format!("RGB({}, {}, {})", c.r(), c.g(), c.b())
    }

    fn event_index(&self, e: &Event) -> usize {
        self.events.iter().position(|x| x == e).expect("event collected")
    }

    fn emit(mut self) -> String {
        self.header();
        self.declarations();
        self.helpers();
        self.apply();
        self.event_fns();
        self.setup_and_loop();
        self.callbacks();
        self.main_fn();
        self.out
    }

    fn header(&mut self) {
        let a = self.a;
        let digest = input_digest(a, self.opts);
        self.line("/*");
        self.line(&format!(" * Generated by {TOOL_NAME} from role '{}'. Do not edit.", a.role));
        self.line(&format!(" * input digest: sha256:{digest}"));
        self.line(&format!(
            " * states: {}, counters: {}, ticks per second: {}, tx period: {} ms",
            a.states.len(),
            a.counters,
            self.opts.ticks_per_second,
            self.opts.tx_period_ms
        ));
        self.line(" */");
        self.line("");
        self.line("#include \"kilolib.h\"");
        self.line("");
    }

    fn declarations(&mut self) {
        let a = self.a;
        self.line(&format!("#define KS_STATES {}", a.states.len()));
        if let Some(t) = a.terminal {
            self.line(&format!("#define KS_TERMINAL {t}"));
        }
        self.line(&format!("#define KS_TX_PERIOD {}u", self.ticks(self.opts.tx_period_ms).max(1)));
        self.line("#define KS_NO_TX 255");
        self.line("");
        self.line("enum { KS_STOP, KS_STRAIGHT, KS_LEFT, KS_RIGHT };");
        self.line("");

        if !self.payloads.is_empty() {
            self.line(&format!("static const uint8_t ks_payload[{}][9] = {{", self.payloads.len()));
            for p in self.payloads.clone() {
                let bytes: Vec<String> = p.iter().map(|b| format!("0x{b:02x}")).collect();
                self.line(&format!("    {{ {} }},", bytes.join(", ")));
            }
            self.line("};");
            self.line("");
        }

        if self.tables {
            let n = a.states.len();
            let motions: Vec<&str> = a.states.iter().map(|s| motion_name(s.action.motor)).collect();
            let colors: Vec<String> = (0..n).map(|i| self.color_expr(i)).collect();
            let slots: Vec<String> = (0..n).map(|i| self.slot_expr(i)).collect();
            let durations: Vec<String> = a.states.iter().map(|s| format!("{}u", self.ticks(s.action.duration_ms))).collect();
            self.table("uint8_t", "ks_motion_table", &motions.iter().map(|s| s.to_string()).collect::<Vec<_>>());
            self.table("uint8_t", "ks_color_table", &colors);
            if !self.payloads.is_empty() {
                self.table("uint8_t", "ks_tx_table", &slots);
            }
            self.table("uint32_t", "ks_duration_table", &durations);
        }

        self.line("static uint16_t ks_state;");
        self.line("static uint32_t ks_state_start;");
        self.line("static uint32_t ks_last_rx;");
        self.line("static uint8_t ks_motion;");
        self.line("static uint8_t ks_heard;");
        for b in self.filters.clone() {
            self.line(&format!("static uint8_t ks_heard_{b:02x};"));
        }
        if a.counters > 0 {
            self.line(&format!("static uint32_t ks_counter[{}];", a.counters));
        }
        if !self.payloads.is_empty() {
            self.line("static uint8_t ks_tx_slot;");
            self.line("static uint32_t ks_last_tx;");
            self.line("static message_t ks_msg;");
        }
        self.line("");
    }

    fn table(&mut self, ty: &str, name: &str, values: &[String]) {
        self.line(&format!("static const {ty} {name}[KS_STATES] = {{"));
        for chunk in values.chunks(8) {
            self.line(&format!("    {},", chunk.join(", ")));
        }
        self.line("};");
        self.line("");
    }

    fn helpers(&mut self) {
        self.line("static void ks_set_motion(uint8_t m)");
        self.line("{");
        self.line("    if (m == ks_motion) {");
        self.line("        return;");
        self.line("    }");
        self.line("    if (ks_motion == KS_STOP) {");
        self.line("        spinup_motors();");
        self.line("    }");
        self.line("    switch (m) {");
        self.line("    case KS_STRAIGHT:");
        self.line("        set_motors(kilo_straight_left, kilo_straight_right);");
        self.line("        break;");
        self.line("    case KS_LEFT:");
        self.line("        set_motors(kilo_turn_left, 0);");
        self.line("        break;");
        self.line("    case KS_RIGHT:");
        self.line("        set_motors(0, kilo_turn_right);");
        self.line("        break;");
        self.line("    default:");
        self.line("        set_motors(0, 0);");
        self.line("        break;");
        self.line("    }");
        self.line("    ks_motion = m;");
        self.line("}");
        self.line("");
        if !self.payloads.is_empty() {
            self.line("static void ks_set_tx(uint8_t slot)");
            self.line("{");
            self.line("    uint8_t i;");
            self.line("    if (slot == ks_tx_slot) {");
            self.line("        return;");
            self.line("    }");
            self.line("    ks_tx_slot = slot;");
            self.line("    if (slot == KS_NO_TX) {");
            self.line("        return;");
            self.line("    }");
            self.line("    for (i = 0; i < 9; i++) {");
            self.line("        ks_msg.data[i] = ks_payload[slot][i];");
            self.line("    }");
            self.line("    ks_msg.type = NORMAL;");
            self.line("    ks_msg.crc = message_crc(&ks_msg);");
            self.line("    ks_last_tx = kilo_ticks - KS_TX_PERIOD;");
            self.line("}");
            self.line("");
        }
    }

    fn apply(&mut self) {
        let has_tx = !self.payloads.is_empty();
        self.line("static void ks_apply(uint16_t s)");
        self.line("{");
        if self.tables {
            self.line("    ks_set_motion(ks_motion_table[s]);");
            self.line("    set_color(ks_color_table[s]);");
            if has_tx {
                self.line("    ks_set_tx(ks_tx_table[s]);");
            }
        } else {
            self.line("    switch (s) {");
            for i in 0..self.a.states.len() {
                let motion = motion_name(self.a.states[i].action.motor);
                let color = self.color_expr(i);
                if i + 1 == self.a.states.len() {
                    self.line("    default:");
                } else {
                    self.line(&format!("    case {i}:"));
                }
                self.line(&format!("        ks_set_motion({motion});"));
                self.line(&format!("        set_color({color});"));
                if has_tx {
                    let slot = self.slot_expr(i);
                    self.line(&format!("        ks_set_tx({slot});"));
                }
                self.line("        break;");
            }
            self.line("    }");
        }
        self.line("}");
        self.line("");
        self.line("static void ks_goto(uint16_t s)");
        self.line("{");
        self.line("    ks_state = s;");
        self.line("    ks_state_start = kilo_ticks;");
        self.line("    ks_apply(s);");
        self.line("}");
        self.line("");
    }

    fn event_fns(&mut self) {
        for (i, e) in self.events.clone().iter().enumerate() {
            let cond = match e {
                Event::MessageHeard { filter: None } => "ks_heard".to_string(),
                Event::MessageHeard { filter: Some(b) } => format!("ks_heard_{b:02x}"),
                Event::Silence { window_ms } => match self.ticks(*window_ms) {
                    0 => "1".to_string(),
                    t => format!("(uint32_t)(kilo_ticks - ks_last_rx) >= {t}u"),
                },
            };
            self.line(&format!("/* {e} */"));
            self.line(&format!("static uint8_t ks_event_{i}(void)"));
            self.line("{");
            self.line(&format!("    return {cond};"));
            self.line("}");
            self.line("");
        }
    }

    fn target(&mut self, target: &Target, indent: usize) {
        let pad = "    ".repeat(indent);
        match target {
            Target::Goto(s) => self.line(&format!("{pad}ks_goto({s});")),
            Target::Loop { counter, count, back, exit } => {
                self.line(&format!("{pad}if (ks_counter[{counter}] + 1u < {count}u) {{"));
                self.line(&format!("{pad}    ks_counter[{counter}]++;"));
                self.line(&format!("{pad}    ks_goto({back});"));
                self.line(&format!("{pad}}} else {{"));
                self.line(&format!("{pad}    ks_counter[{counter}] = 0;"));
                self.target(exit, indent + 1);
                self.line(&format!("{pad}}}"));
            }
        }
    }

    fn setup_and_loop(&mut self) {
        let a = self.a;
        self.line("static void setup(void)");
        self.line("{");
        self.line("    ks_motion = KS_STOP;");
        if !self.payloads.is_empty() {
            self.line("    ks_tx_slot = KS_NO_TX;");
        }
        self.line("    ks_last_rx = kilo_ticks;");
        self.line(&format!("    ks_goto({});", a.initial));
        self.line("}");
        self.line("");
        self.line("static void loop(void)");
        self.line("{");
        self.line("    switch (ks_state) {");
        for s in &a.states {
            if Some(s.id) == a.terminal {
                continue;
            }
            self.line(&format!("    case {}:", s.id));
            let edges = a.edges_from(s.id);
            let mut first = true;
            for t in edges {
                let cond = match t.trigger {
                    Trigger::EventFired(e) => format!("ks_event_{}()", self.event_index(&e)),
                    Trigger::Elapsed if self.tables => {
                        "(uint32_t)(kilo_ticks - ks_state_start) >= ks_duration_table[ks_state]".to_string()
                    }
                    Trigger::Elapsed => match self.ticks(s.action.duration_ms) {
                        0 => "1".to_string(),
                        n => format!("(uint32_t)(kilo_ticks - ks_state_start) >= {n}u"),
                    },
                };
                let kw = if first { "if" } else { "} else if" };
                self.line(&format!("        {kw} ({cond}) {{"));
                for c in &t.resets {
                    self.line(&format!("            ks_counter[{c}] = 0;"));
                }
                self.target(&t.target, 3);
                first = false;
            }
            if !first {
                self.line("        }");
            }
            self.line("        break;");
        }
        self.line("    default:");
        self.line("        break;");
        self.line("    }");
        self.line("    ks_heard = 0;");
        for b in self.filters.clone() {
            self.line(&format!("    ks_heard_{b:02x} = 0;"));
        }
        self.line("}");
        self.line("");
    }

    fn callbacks(&mut self) {
        self.line("static void ks_message_rx(message_t *m, distance_measurement_t *d)");
        self.line("{");
        self.line("    (void)d;");
        if self.filters.is_empty() {
            self.line("    (void)m;");
        }
        self.line("    ks_last_rx = kilo_ticks;");
        self.line("    ks_heard = 1;");
        for b in self.filters.clone() {
            self.line(&format!("    if (m->data[0] == 0x{b:02x}) {{"));
            self.line(&format!("        ks_heard_{b:02x} = 1;"));
            self.line("    }");
        }
        self.line("}");
        self.line("");
        self.line("static message_t *ks_message_tx(void)");
        self.line("{");
        if self.payloads.is_empty() {
            self.line("    return 0;");
        } else {
            self.line("    if (ks_tx_slot == KS_NO_TX) {");
            self.line("        return 0;");
            self.line("    }");
            self.line("    if ((uint32_t)(kilo_ticks - ks_last_tx) < KS_TX_PERIOD) {");
            self.line("        return 0;");
            self.line("    }");
            self.line("    ks_last_tx = kilo_ticks;");
            self.line("    return &ks_msg;");
        }
        self.line("}");
        self.line("");
    }

    fn main_fn(&mut self) {
        self.line("int main(void)");
        self.line("{");
        self.line("    kilo_init();");
        self.line("    kilo_message_rx = ks_message_rx;");
        self.line("    kilo_message_tx = ks_message_tx;");
        self.line("    kilo_start(setup, loop);");
        self.line("    return 0;");
        self.line("}");
    }
}
