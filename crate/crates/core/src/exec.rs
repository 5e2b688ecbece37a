//! Pieces shared by everything that executes a role program step by step.

use std::collections::BTreeSet;

use crate::model::Event;

/// Answers whether an event fired during the current tick.
pub trait Observed {
    fn fired(&self, event: &Event) -> bool;
}

impl Observed for BTreeSet<Event> {
    fn fired(&self, event: &Event) -> bool {
        self.contains(event)
    }
}

impl Observed for [Event] {
    fn fired(&self, event: &Event) -> bool {
        self.contains(event)
    }
}

impl Observed for Vec<Event> {
    fn fired(&self, event: &Event) -> bool {
        self.contains(event)
    }
}

/// Nothing fired.
pub struct Quiet;

impl Observed for Quiet {
    fn fired(&self, _: &Event) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cause {
    Elapsed,
    Event(Event),
}

/// Reported whenever an executor moves to a new state (including re-entering
/// the same one).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    /// Pre-order index of the `Act` node now running; `None` once finished.
    pub act: Option<usize>,
    pub cause: Cause,
}
