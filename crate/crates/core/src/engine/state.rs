use std::collections::HashMap;

use serde::Serialize;

/// Progress of one interval on one worker within one step. `ReadyFor*` means the
/// corresponding task has all its dependencies met. `ReadyForImport` and `Imported`
/// refer to the import that feeds the next step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalState {
    Waiting,
    ReadyForProcess,
    Processed,
    ReadyForExport,
    Exported,
    ReadyForImport,
    Imported,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StateTransition {
    pub worker: usize,
    pub interval: usize,
    pub iteration: usize,
    pub from: IntervalState,
    pub to: IntervalState,
}

/// Observed interval states keyed by `(worker, interval, step)`, with the full
/// transition history for audits.
#[derive(Debug, Clone, Default)]
pub struct StateTable {
    current: HashMap<(usize, usize, usize), IntervalState>,
    history: Vec<StateTransition>,
    regressions: usize,
}

impl StateTable {
    pub fn get(&self, worker: usize, interval: usize, iteration: usize) -> IntervalState {
        self.current.get(&(worker, interval, iteration)).copied().unwrap_or(IntervalState::Waiting)
    }

    /// Moves forward to `to`. A move that is not strictly forward is counted as a
    /// regression and ignored.
    pub fn advance(&mut self, worker: usize, interval: usize, iteration: usize, to: IntervalState) {
        let from = self.get(worker, interval, iteration);
        if to <= from {
            self.regressions += 1;
            return;
        }
        self.current.insert((worker, interval, iteration), to);
        self.history.push(StateTransition { worker, interval, iteration, from, to });
    }

    pub fn history(&self) -> &[StateTransition] {
        &self.history
    }

    pub fn regressions(&self) -> usize {
        self.regressions
    }

    pub fn count_in(&self, state: IntervalState) -> usize {
        self.current.values().filter(|&&s| s == state).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_only() {
        let mut t = StateTable::default();
        t.advance(0, 1, 0, IntervalState::ReadyForProcess);
        t.advance(0, 1, 0, IntervalState::ReadyForImport);
        assert_eq!(t.get(0, 1, 0), IntervalState::ReadyForImport);
        t.advance(0, 1, 0, IntervalState::Processed);
        assert_eq!(t.regressions(), 1);
        assert_eq!(t.get(0, 1, 0), IntervalState::ReadyForImport);
        assert_eq!(t.history().len(), 2);
    }
}
