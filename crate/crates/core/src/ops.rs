//! Deterministic operation counts.

use serde::Serialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounter {
    pub alias_draws: u64,
    /// Containment tests, corner tests and table-building steps.
    pub comparisons: u64,
    pub envelope_calls: u64,
    pub locate_steps: u64,
}

impl OpCounter {
    pub fn total(&self) -> u64 {
        self.alias_draws + self.comparisons + self.envelope_calls + self.locate_steps
    }

    pub fn merge(&mut self, o: &OpCounter) {
        self.alias_draws += o.alias_draws;
        self.comparisons += o.comparisons;
        self.envelope_calls += o.envelope_calls;
        self.locate_steps += o.locate_steps;
    }
}
