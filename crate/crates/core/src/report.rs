use crate::instance::Time;
use crate::schedule::ActivityList;

/// What happened to the current solution in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// The candidate replaced the current solution.
    Accepted,
    /// The current solution was kept.
    Rejected,
    /// The candidate replaced the current solution after the stagnation limit.
    Restarted,
    /// No candidate was available (empty neighborhood, local optimum, all
    /// moves tabu).
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    /// 1-based iteration index.
    pub iteration: usize,
    /// Makespan of the candidate examined in this iteration.
    pub candidate: Time,
    /// Makespan of the current solution after the iteration.
    pub current: Time,
    /// Best makespan found up to and including this iteration.
    pub best: Time,
    pub step: Step,
}

/// Outcome of one search run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub initial_makespan: Time,
    pub best_makespan: Time,
    pub best_list: ActivityList,
    pub trace: Vec<TraceRow>,
    /// Iteration at which `best_makespan` was first reached; 0 for the
    /// initial solution.
    pub best_iteration: usize,
    /// Number of serial-SGS evaluations, construction included.
    pub evaluations: u64,
}

impl RunReport {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Tracks the incumbent and builds the trace shared by all drivers.
#[derive(Debug)]
pub(crate) struct Recorder {
    initial: Time,
    best: Time,
    best_list: Vec<usize>,
    best_iteration: usize,
    trace: Vec<TraceRow>,
}

impl Recorder {
    pub(crate) fn new(initial: &[usize], makespan: Time, capacity: usize) -> Self {
        Self {
            initial: makespan,
            best: makespan,
            best_list: initial.to_vec(),
            best_iteration: 0,
            // Budget-limited runs may pass an effectively unbounded capacity.
            trace: Vec::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub(crate) fn best(&self) -> Time {
        self.best
    }

    pub(crate) fn record(
        &mut self,
        candidate: Time,
        current: &[usize],
        current_makespan: Time,
        step: Step,
    ) {
        let iteration = self.trace.len() + 1;
        if current_makespan < self.best {
            self.best = current_makespan;
            self.best_list.clear();
            self.best_list.extend_from_slice(current);
            self.best_iteration = iteration;
        }
        self.trace.push(TraceRow {
            iteration,
            candidate,
            current: current_makespan,
            best: self.best,
            step,
        });
    }

    pub(crate) fn finish(self, evaluations: u64) -> RunReport {
        RunReport {
            initial_makespan: self.initial,
            best_makespan: self.best,
            best_list: ActivityList::from_vec_unchecked(self.best_list),
            trace: self.trace,
            best_iteration: self.best_iteration,
            evaluations,
        }
    }
}
