//! Timed finite-state automata and the lowering of role programs into them.
//!
//! The automaton is the single intermediate form behind both the simulator
//! and the C emitter. Each state holds one [`Action`]; every non-terminal
//! state leaves through exactly one `Elapsed` edge and through one
//! `EventFired` edge per distinct event of its enclosing `until` blocks,
//! listed innermost first.
//!
//! `repeat` blocks are unrolled while the whole program fits the state
//! budget. Past the budget they are folded into a single pass whose back
//! edge carries a counter ([`Target::Loop`]).

use std::fmt;

use thiserror::Error;

use crate::exec::{Cause, Entry, Observed};
use crate::model::{Action, ActionProgram, Event, Step, MAX_DEPTH};

pub type StateId = u32;
pub type CounterId = u32;

pub const DEFAULT_STATE_BUDGET: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("nesting depth {depth} exceeds the limit of {max}")]
    DepthExceeded { depth: usize, max: usize },
    #[error("program needs {needed} states but the budget is {budget}")]
    StateBudgetExceeded { needed: u64, budget: usize },
    #[error("invalid program: {0}")]
    Invalid(#[from] crate::model::ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepeatEncoding {
    /// Unroll when the result fits the budget, otherwise use counters.
    #[default]
    Auto,
    Unroll,
    Counters,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerOptions {
    pub max_depth: usize,
    pub state_budget: usize,
    pub encoding: RepeatEncoding,
    /// When false, `Auto` fails instead of falling back to counters.
    pub allow_counters: bool,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions {
            max_depth: MAX_DEPTH,
            state_budget: DEFAULT_STATE_BUDGET,
            encoding: RepeatEncoding::Auto,
            allow_counters: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub id: StateId,
    pub action: Action,
    /// Pre-order index of the `Act` node this state was lowered from.
    pub act: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trigger {
    Elapsed,
    EventFired(Event),
}

/// Where a transition lands.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Goto(StateId),
    /// Counted back edge: while `counter + 1 < count` bump the counter and
    /// jump to `back`; otherwise clear it and continue at `exit`.
    Loop { counter: CounterId, count: u32, back: StateId, exit: Box<Target> },
}

impl Target {
    fn resolve(&self, counters: &mut [u32]) -> StateId {
        match self {
            Target::Goto(s) => *s,
            Target::Loop { counter, count, back, exit } => {
                let c = &mut counters[*counter as usize];
                if *c + 1 < *count {
                    *c += 1;
                    *back
                } else {
                    *c = 0;
                    exit.resolve(counters)
                }
            }
        }
    }

    /// States this target can land on.
    pub fn destinations(&self) -> Vec<StateId> {
        match self {
            Target::Goto(s) => vec![*s],
            Target::Loop { back, exit, .. } => {
                let mut v = vec![*back];
                v.extend(exit.destinations());
                v
            }
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Goto(s) => write!(f, "{s}"),
            Target::Loop { counter, count, back, exit } => {
                write!(f, "loop(c{counter}<{count}?{back}:{exit})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    pub trigger: Trigger,
    pub target: Target,
    /// Counters cleared before the target is resolved (counters of loops
    /// inside an `until` body that the exit edge abandons).
    pub resets: Vec<CounterId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Automaton {
    pub role: String,
    pub states: Vec<State>,
    /// Grouped by `from` in state order; within a state, event edges come
    /// innermost-first and the `Elapsed` edge is last.
    pub transitions: Vec<Transition>,
    pub initial: StateId,
    pub terminal: Option<StateId>,
    pub counters: u32,
    edges: Vec<(u32, u32)>,
}

impl Automaton {
    pub fn state(&self, id: StateId) -> &State {
        &self.states[id as usize]
    }

    pub fn edges_from(&self, id: StateId) -> &[Transition] {
        let (lo, hi) = self.edges[id as usize];
        &self.transitions[lo as usize..hi as usize]
    }

    pub fn uses_counters(&self) -> bool {
        self.counters > 0
    }

    /// Distinct events any transition waits for, sorted.
    pub fn events(&self) -> Vec<Event> {
        let mut v: Vec<Event> = self
            .transitions
            .iter()
            .filter_map(|t| match t.trigger {
                Trigger::EventFired(e) => Some(e),
                Trigger::Elapsed => None,
            })
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn start(&self) -> Cursor {
        Cursor { state: self.initial, elapsed_ms: 0, counters: vec![0; self.counters as usize] }
    }

    pub fn is_terminal(&self, cursor: &Cursor) -> bool {
        self.terminal == Some(cursor.state)
    }

    /// Outputs of the state the cursor is in.
    pub fn action(&self, cursor: &Cursor) -> &Action {
        &self.state(cursor.state).action
    }

    /// Advances `cursor` by `dt_ms`.
    ///
    /// Event edges are tried first, innermost `until` first, and at most one
    /// edge is taken per call. Without a fired event, time accrues and the
    /// `Elapsed` edge is taken once the state's duration is reached; any
    /// surplus time is dropped. A `dt_ms` of zero only evaluates events.
    pub fn step(&self, cursor: &mut Cursor, dt_ms: u32, observed: &(impl Observed + ?Sized)) -> Option<Entry> {
        if self.is_terminal(cursor) {
            return None;
        }
        let edges = self.edges_from(cursor.state);
        for t in edges {
            if let Trigger::EventFired(e) = t.trigger {
                if observed.fired(&e) {
                    for &c in &t.resets {
                        cursor.counters[c as usize] = 0;
                    }
                    return Some(self.enter(cursor, &t.target, Cause::Event(e)));
                }
            }
        }
        cursor.elapsed_ms = cursor.elapsed_ms.saturating_add(dt_ms);
        if cursor.elapsed_ms >= self.action(cursor).duration_ms {
            let t = edges.last().expect("non-terminal state without an elapsed edge");
            debug_assert_eq!(t.trigger, Trigger::Elapsed);
            return Some(self.enter(cursor, &t.target, Cause::Elapsed));
        }
        None
    }

    fn enter(&self, cursor: &mut Cursor, target: &Target, cause: Cause) -> Entry {
        cursor.state = target.resolve(&mut cursor.counters);
        cursor.elapsed_ms = 0;
        Entry { act: self.state(cursor.state).act, cause }
    }
}

impl fmt::Display for Automaton {
    /// Canonical text dump; stable across runs.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "automaton role={} states={} counters={} initial={} terminal={}",
            self.role,
            self.states.len(),
            self.counters,
            self.initial,
            self.terminal.map_or("-".to_string(), |t| t.to_string())
        )?;
        for s in &self.states {
            let a = &s.action;
            writeln!(
                f,
                "state {} act={} motor={} led={} tx={} dur={}",
                s.id,
                s.act.map_or("-".to_string(), |i| i.to_string()),
                a.motor,
                a.led,
                a.tx.as_ref().map_or("-".to_string(), |p| p.to_string()),
                a.duration_ms
            )?;
        }
        for t in &self.transitions {
            let trig = match t.trigger {
                Trigger::Elapsed => "elapsed".to_string(),
                Trigger::EventFired(e) => format!("event({e})"),
            };
            write!(f, "edge {} {} -> {}", t.from, trig, t.target)?;
            if !t.resets.is_empty() {
                let r: Vec<String> = t.resets.iter().map(|c| format!("c{c}")).collect();
                write!(f, " reset {}", r.join(","))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Per-robot position inside an automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cursor {
    pub state: StateId,
    pub elapsed_ms: u32,
    pub counters: Vec<u32>,
}

/// Functional form of [`Automaton::step`]: returns the advanced cursor and
/// the actuator outputs that hold after the step.
pub fn automaton_step(
    automaton: &Automaton,
    cursor: &Cursor,
    dt_ms: u32,
    observed: &(impl Observed + ?Sized),
) -> (Cursor, Action) {
    let mut next = cursor.clone();
    automaton.step(&mut next, dt_ms, observed);
    let out = automaton.action(&next).clone();
    (next, out)
}

pub fn lower(program: &ActionProgram) -> Result<Automaton, LowerError> {
    lower_with(program, &LowerOptions::default())
}

pub fn lower_with(program: &ActionProgram, opts: &LowerOptions) -> Result<Automaton, LowerError> {
    program.check()?;
    let depth = program.depth();
    if depth > opts.max_depth {
        return Err(LowerError::DepthExceeded { depth, max: opts.max_depth });
    }

    let unrolled = seq_size(&program.steps, Mode::Unroll).saturating_add(1);
    let folded = seq_size(&program.steps, Mode::Counters).saturating_add(1);
    let budget = opts.state_budget as u64;
    let mode = match opts.encoding {
        RepeatEncoding::Unroll => Mode::Unroll,
        RepeatEncoding::Counters => Mode::Counters,
        RepeatEncoding::Auto if unrolled <= budget => Mode::Unroll,
        RepeatEncoding::Auto if !opts.allow_counters => {
            return Err(LowerError::StateBudgetExceeded { needed: unrolled, budget: opts.state_budget })
        }
        RepeatEncoding::Auto => Mode::Counters,
    };
    let needed = if mode == Mode::Unroll { unrolled } else { folded };
    if needed > budget {
        return Err(LowerError::StateBudgetExceeded { needed, budget: opts.state_budget });
    }

    let terminal = (needed - 1) as StateId;
    let mut lw = Lowerer { mode, states: Vec::new(), transitions: Vec::new(), counters: 0, untils: Vec::new() };
    lw.seq(&program.steps, Target::Goto(terminal), 0);
    debug_assert_eq!(lw.states.len() as u32, terminal);
    lw.states.push(State { id: terminal, action: Action::idle(), act: None });

    let mut edges = vec![(0u32, 0u32); lw.states.len()];
    let mut i = 0usize;
    for (sid, slot) in edges.iter_mut().enumerate() {
        let lo = i;
        while i < lw.transitions.len() && lw.transitions[i].from as usize == sid {
            i += 1;
        }
        *slot = (lo as u32, i as u32);
    }
    debug_assert_eq!(i, lw.transitions.len());

    Ok(Automaton {
        role: program.role.clone(),
        states: lw.states,
        transitions: lw.transitions,
        initial: 0,
        terminal: Some(terminal),
        counters: lw.counters,
        edges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Unroll,
    Counters,
}

fn seq_size(steps: &[Step], mode: Mode) -> u64 {
    steps.iter().fold(0u64, |acc, s| acc.saturating_add(step_size(s, mode)))
}

fn step_size(step: &Step, mode: Mode) -> u64 {
    match step {
        Step::Act(_) => 1,
        Step::Repeat { count, body } => match mode {
            Mode::Unroll => (*count as u64).saturating_mul(seq_size(body, mode)),
            Mode::Counters => seq_size(body, mode),
        },
        Step::Until { body, .. } => seq_size(body, mode),
    }
}

fn seq_counters(steps: &[Step], mode: Mode) -> u32 {
    steps.iter().map(|s| step_counters(s, mode)).sum()
}

fn step_counters(step: &Step, mode: Mode) -> u32 {
    match step {
        Step::Act(_) => 0,
        Step::Repeat { count, body } => {
            let own = u32::from(mode == Mode::Counters && *count > 1);
            own + seq_counters(body, mode)
        }
        Step::Until { body, .. } => seq_counters(body, mode),
    }
}

struct UntilFrame {
    event: Event,
    exit: Target,
    resets: Vec<CounterId>,
}

struct Lowerer {
    mode: Mode,
    states: Vec<State>,
    transitions: Vec<Transition>,
    counters: u32,
    untils: Vec<UntilFrame>,
}

impl Lowerer {
    fn next_id(&self) -> StateId {
        self.states.len() as StateId
    }

    /// Lowers `steps` so that finishing the last one continues at `cont`.
    /// `act_base` is the pre-order index of the first action in `steps`.
    fn seq(&mut self, steps: &[Step], cont: Target, act_base: usize) {
        let mut act = act_base;
        for (i, step) in steps.iter().enumerate() {
            let next = if i + 1 == steps.len() {
                cont.clone()
            } else {
                Target::Goto(self.next_id() + step_size(step, self.mode) as StateId)
            };
            self.step(step, next, act);
            act += step.action_count();
        }
    }

    fn step(&mut self, step: &Step, cont: Target, act: usize) {
        match step {
            Step::Act(action) => {
                let id = self.next_id();
                self.states.push(State { id, action: action.clone(), act: Some(act) });
                let mut seen: Vec<Event> = Vec::new();
                for frame in self.untils.iter().rev() {
                    if seen.contains(&frame.event) {
                        continue;
                    }
                    seen.push(frame.event);
                    self.transitions.push(Transition {
                        from: id,
                        trigger: Trigger::EventFired(frame.event),
                        target: frame.exit.clone(),
                        resets: frame.resets.clone(),
                    });
                }
                self.transitions.push(Transition { from: id, trigger: Trigger::Elapsed, target: cont, resets: vec![] });
            }
            Step::Repeat { count, body } => match self.mode {
                Mode::Unroll => {
                    let pass = seq_size(body, self.mode) as StateId;
                    for k in 0..*count {
                        let next = if k + 1 == *count { cont.clone() } else { Target::Goto(self.next_id() + pass) };
                        self.seq(body, next, act);
                    }
                }
                Mode::Counters if *count == 1 => self.seq(body, cont, act),
                Mode::Counters => {
                    let counter = self.counters;
                    self.counters += 1;
                    let back = self.next_id();
                    self.seq(body, Target::Loop { counter, count: *count, back, exit: Box::new(cont) }, act);
                }
            },
            Step::Until { event, body } => {
                let entry = self.next_id();
                let first = self.counters;
                let resets = (first..first + seq_counters(body, self.mode)).collect();
                self.untils.push(UntilFrame { event: *event, exit: cont, resets });
                self.seq(body, Target::Goto(entry), act);
                self.untils.pop();
            }
        }
    }
}
