//! Direct tree-walking execution of a role program.
//!
//! Runs the AST without lowering it, with the same per-step contract as
//! [`Automaton::step`](crate::automaton::Automaton::step): event exits are
//! checked innermost-first before time accrues, at most one move happens
//! per call, and surplus time past an action's end is dropped. It serves as
//! the reference the lowered automata are checked against.

use crate::exec::{Cause, Entry, Observed};
use crate::model::{Action, ActionProgram, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Frame {
    index: usize,
    pass: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeWalker {
    /// `frames[0]` walks the top-level list; `frames[i + 1]` walks the body
    /// of the block at `frames[i].index`.
    frames: Vec<Frame>,
    elapsed_ms: u32,
    done: bool,
}

fn list_at<'p>(program: &'p ActionProgram, frames: &[Frame]) -> &'p [Step] {
    let mut list: &[Step] = &program.steps;
    for f in frames {
        list = match &list[f.index] {
            Step::Repeat { body, .. } | Step::Until { body, .. } => body,
            Step::Act(_) => unreachable!("frame below an action"),
        };
    }
    list
}

impl TreeWalker {
    pub fn new(program: &ActionProgram) -> Self {
        let mut w = TreeWalker { frames: vec![Frame { index: 0, pass: 0 }], elapsed_ms: 0, done: false };
        if program.steps.is_empty() {
            w.done = true;
        } else {
            w.descend(program);
        }
        w
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn action(&self, program: &ActionProgram) -> Action {
        if self.done {
            return Action::idle();
        }
        let (last, outer) = self.frames.split_last().unwrap();
        match &list_at(program, outer)[last.index] {
            Step::Act(a) => a.clone(),
            _ => unreachable!("walker rests on a block"),
        }
    }

    /// Pre-order index of the current action among all `Act` nodes.
    pub fn act_index(&self, program: &ActionProgram) -> Option<usize> {
        if self.done {
            return None;
        }
        let mut n = 0;
        let mut list: &[Step] = &program.steps;
        for f in &self.frames {
            n += list[..f.index].iter().map(Step::action_count).sum::<usize>();
            if let Step::Repeat { body, .. } | Step::Until { body, .. } = &list[f.index] {
                list = body;
            }
        }
        Some(n)
    }

    pub fn step(&mut self, program: &ActionProgram, dt_ms: u32, observed: &(impl Observed + ?Sized)) -> Option<Entry> {
        if self.done {
            return None;
        }
        for depth in (1..self.frames.len()).rev() {
            if let Step::Until { event, .. } = &list_at(program, &self.frames[..depth - 1])[self.frames[depth - 1].index] {
                if observed.fired(event) {
                    let event = *event;
                    self.frames.truncate(depth);
                    self.advance(program);
                    self.elapsed_ms = 0;
                    return Some(Entry { act: self.act_index(program), cause: Cause::Event(event) });
                }
            }
        }
        self.elapsed_ms = self.elapsed_ms.saturating_add(dt_ms);
        if self.elapsed_ms >= self.action(program).duration_ms {
            self.advance(program);
            self.elapsed_ms = 0;
            return Some(Entry { act: self.act_index(program), cause: Cause::Elapsed });
        }
        None
    }

    /// Pushes frames until the top frame points at an action.
    fn descend(&mut self, program: &ActionProgram) {
        loop {
            let (last, outer) = self.frames.split_last().unwrap();
            match &list_at(program, outer)[last.index] {
                Step::Act(_) => return,
                _ => self.frames.push(Frame { index: 0, pass: 0 }),
            }
        }
    }

    /// Moves past the step the top frame points at.
    fn advance(&mut self, program: &ActionProgram) {
        loop {
            let n = self.frames.len();
            let len = list_at(program, &self.frames[..n - 1]).len();
            let top = self.frames.last_mut().unwrap();
            top.index += 1;
            if top.index < len {
                self.descend(program);
                return;
            }
            if n == 1 {
                self.done = true;
                return;
            }
            let parent = &list_at(program, &self.frames[..n - 2])[self.frames[n - 2].index];
            let top = self.frames.last_mut().unwrap();
            match parent {
                Step::Repeat { count, .. } if top.pass + 1 < *count => {
                    top.pass += 1;
                    top.index = 0;
                    self.descend(program);
                    return;
                }
                Step::Until { .. } => {
                    top.index = 0;
                    self.descend(program);
                    return;
                }
                _ => {
                    self.frames.pop();
                }
            }
        }
    }
}
