//! The immutable project description.
//!
//! Activities are addressed by 0-based index inside the crate. Files, error
//! messages and schedule exports use the 1-based numbering of PSPLIB, where
//! activity 1 is the dummy source and activity `n` the dummy sink.

use thiserror::Error;

use crate::closure::{topological_order, CycleError, PrecedenceClosure};

/// Discrete time unit.
pub type Time = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("a project needs at least the two dummy activities, got {0}")]
    TooFewActivities(usize),
    #[error("expected {expected} entries for {what}, got {got}")]
    Arity {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("resource {resource} has zero capacity")]
    ZeroCapacity { resource: usize },
    #[error("activity {activity} requests {demand} units of resource {resource}, capacity is {capacity}")]
    DemandExceedsCapacity {
        activity: usize,
        resource: usize,
        demand: u32,
        capacity: u32,
    },
    #[error("activity {activity} lists unknown successor {successor}")]
    UnknownSuccessor { activity: usize, successor: usize },
    #[error("dummy activity {0} must have zero duration and zero demands")]
    DummyNotEmpty(usize),
    #[error("activity {0} has no predecessor, only the source activity may")]
    ExtraSource(usize),
    #[error("activity {0} has no successor, only the sink activity may")]
    ExtraSink(usize),
    #[error("the source activity has a predecessor")]
    SourceHasPredecessor,
    #[error("the sink activity has a successor")]
    SinkHasSuccessor,
    #[error(transparent)]
    Cycle(#[from] CycleError),
}

/// Single-mode RCPSP instance with renewable resources.
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    durations: Vec<Time>,
    demands: Vec<Vec<u32>>,
    capacities: Vec<u32>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
    horizon: Time,
    // derived
    demand_pairs: Vec<Vec<(usize, u32)>>,
    closure: PrecedenceClosure,
    topological: Vec<usize>,
    heads: Vec<Time>,
    tails: Vec<Time>,
}

impl Instance {
    /// Validates and builds an instance from 0-based data.
    ///
    /// `successors[i]` lists the direct successors of activity `i`; index 0
    /// is the dummy source and the last index the dummy sink.
    pub fn new(
        name: impl Into<String>,
        durations: Vec<Time>,
        demands: Vec<Vec<u32>>,
        capacities: Vec<u32>,
        successors: Vec<Vec<usize>>,
        horizon: Time,
    ) -> Result<Self, InstanceError> {
        let n = durations.len();
        if n < 2 {
            return Err(InstanceError::TooFewActivities(n));
        }
        for (what, got) in [("demands", demands.len()), ("successors", successors.len())] {
            if got != n {
                return Err(InstanceError::Arity {
                    what,
                    expected: n,
                    got,
                });
            }
        }
        let r = capacities.len();
        if let Some(k) = capacities.iter().position(|&c| c == 0) {
            return Err(InstanceError::ZeroCapacity { resource: k + 1 });
        }
        for (i, row) in demands.iter().enumerate() {
            if row.len() != r {
                return Err(InstanceError::Arity {
                    what: "resource demands",
                    expected: r,
                    got: row.len(),
                });
            }
            for (k, (&d, &cap)) in row.iter().zip(&capacities).enumerate() {
                if d > cap {
                    return Err(InstanceError::DemandExceedsCapacity {
                        activity: i + 1,
                        resource: k + 1,
                        demand: d,
                        capacity: cap,
                    });
                }
            }
        }
        for dummy in [0, n - 1] {
            if durations[dummy] != 0 || demands[dummy].iter().any(|&d| d != 0) {
                return Err(InstanceError::DummyNotEmpty(dummy + 1));
            }
        }

        let mut predecessors = vec![Vec::new(); n];
        for (i, succ) in successors.iter().enumerate() {
            for &j in succ {
                if j >= n {
                    return Err(InstanceError::UnknownSuccessor {
                        activity: i + 1,
                        successor: j + 1,
                    });
                }
                predecessors[j].push(i);
            }
        }
        let topological = topological_order(&successors)?;
        if !predecessors[0].is_empty() {
            return Err(InstanceError::SourceHasPredecessor);
        }
        if !successors[n - 1].is_empty() {
            return Err(InstanceError::SinkHasSuccessor);
        }
        for i in 1..n - 1 {
            if predecessors[i].is_empty() {
                return Err(InstanceError::ExtraSource(i + 1));
            }
            if successors[i].is_empty() {
                return Err(InstanceError::ExtraSink(i + 1));
            }
        }

        let closure = PrecedenceClosure::from_order(&successors, &topological);

        let mut heads = vec![0; n];
        for &i in &topological {
            for &j in &successors[i] {
                heads[j] = heads[j].max(heads[i] + durations[i]);
            }
        }
        let mut tails = vec![0; n];
        for &i in topological.iter().rev() {
            let after = successors[i].iter().map(|&j| tails[j]).max().unwrap_or(0);
            tails[i] = durations[i] + after;
        }

        let demand_pairs = demands
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &d)| d > 0)
                    .map(|(k, &d)| (k, d))
                    .collect()
            })
            .collect();

        Ok(Self {
            name: name.into(),
            durations,
            demands,
            capacities,
            successors,
            predecessors,
            horizon,
            demand_pairs,
            closure,
            topological,
            heads,
            tails,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    /// Number of activities including both dummies.
    pub fn activity_count(&self) -> usize {
        self.durations.len()
    }

    /// Number of activities excluding the dummies.
    pub fn real_activity_count(&self) -> usize {
        self.durations.len() - 2
    }

    pub fn resource_count(&self) -> usize {
        self.capacities.len()
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.durations.len() - 1
    }

    pub fn is_dummy(&self, activity: usize) -> bool {
        activity == 0 || activity == self.sink()
    }

    /// Non-dummy activities in index order.
    pub fn real_activities(&self) -> std::ops::Range<usize> {
        1..self.sink()
    }

    pub fn duration(&self, activity: usize) -> Time {
        self.durations[activity]
    }

    pub fn durations(&self) -> &[Time] {
        &self.durations
    }

    pub fn demands(&self, activity: usize) -> &[u32] {
        &self.demands[activity]
    }

    /// `(resource, demand)` pairs with non-zero demand.
    pub fn demand_pairs(&self, activity: usize) -> &[(usize, u32)] {
        &self.demand_pairs[activity]
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn successors(&self, activity: usize) -> &[usize] {
        &self.successors[activity]
    }

    pub fn predecessors(&self, activity: usize) -> &[usize] {
        &self.predecessors[activity]
    }

    /// Horizon as declared by the source file.
    pub fn horizon(&self) -> Time {
        self.horizon
    }

    /// Sum of all durations; no serial schedule is longer than this.
    pub fn total_duration(&self) -> Time {
        self.durations.iter().sum()
    }

    pub fn closure(&self) -> &PrecedenceClosure {
        &self.closure
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topological
    }

    /// Earliest precedence-feasible start of `activity`, ignoring resources.
    pub fn head(&self, activity: usize) -> Time {
        self.heads[activity]
    }

    /// Longest duration-weighted path from the start of `activity` to the
    /// end of the project, `activity` included.
    pub fn tail(&self, activity: usize) -> Time {
        self.tails[activity]
    }

    /// Longest path through the precedence graph. Never exceeds the makespan
    /// of a feasible schedule.
    pub fn critical_path_lower_bound(&self) -> Time {
        self.tails[0]
    }
}
