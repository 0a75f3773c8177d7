//! Activity lists, decoded schedules and the independent feasibility check.

use std::fmt::{self, Write as _};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::closure::PrecedenceClosure;
use crate::decode::Decoder;
use crate::instance::{Instance, Time};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ListError {
    #[error("list has {got} entries, the instance has {expected} activities")]
    Length { expected: usize, got: usize },
    #[error("activity {0} is out of range or appears twice")]
    NotPermutation(usize),
    #[error("activity {successor} is listed before its predecessor {predecessor}")]
    Precedence {
        predecessor: usize,
        successor: usize,
    },
    #[error("the dummy source must come first and the dummy sink last")]
    DummyPlacement,
}

/// A precedence-feasible permutation of all activities, dummies included.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivityList {
    order: Vec<usize>,
}

impl ActivityList {
    /// Checks that `order` (0-based) is a precedence-feasible permutation of
    /// the instance's activities.
    pub fn new(order: Vec<usize>, instance: &Instance) -> Result<Self, ListError> {
        let n = instance.activity_count();
        if order.len() != n {
            return Err(ListError::Length {
                expected: n,
                got: order.len(),
            });
        }
        let mut seen = FixedBitSet::with_capacity(n);
        for &a in &order {
            if a >= n || seen.put(a) {
                return Err(ListError::NotPermutation(a + 1));
            }
        }
        if let Some((predecessor, successor)) = first_inversion(&order, instance.closure()) {
            return Err(ListError::Precedence {
                predecessor: predecessor + 1,
                successor: successor + 1,
            });
        }
        if order[0] != instance.source() || order[n - 1] != instance.sink() {
            return Err(ListError::DummyPlacement);
        }
        Ok(Self { order })
    }

    pub(crate) fn from_vec_unchecked(order: Vec<usize>) -> Self {
        Self { order }
    }

    /// Activities in topological index order.
    pub fn topological(instance: &Instance) -> Self {
        Self {
            order: instance.topological_order().to_vec(),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

impl fmt::Display for ActivityList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_char(' ')?;
            }
            write!(f, "{}", a + 1)?;
        }
        Ok(())
    }
}

/// First pair `(p, s)` where `s` is listed before its transitive predecessor `p`.
fn first_inversion(order: &[usize], closure: &PrecedenceClosure) -> Option<(usize, usize)> {
    let mut seen = FixedBitSet::with_capacity(closure.len());
    for &a in order {
        if let Some(s) = closure.successors(a).intersection(&seen).next() {
            return Some((a, s));
        }
        seen.insert(a);
    }
    None
}

/// `true` iff no activity of `order` appears after one of its transitive
/// successors. Works on partial lists as well: only members are compared.
pub fn is_precedence_feasible_list(order: &[usize], closure: &PrecedenceClosure) -> bool {
    first_inversion(order, closure).is_none()
}

/// Start and completion times of every activity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub start_times: Vec<Time>,
    pub completion_times: Vec<Time>,
    pub makespan: Time,
}

impl Schedule {
    /// Derives completions and makespan from start times.
    pub fn from_start_times(instance: &Instance, start_times: Vec<Time>) -> Self {
        let completion_times: Vec<Time> = start_times
            .iter()
            .zip(instance.durations())
            .map(|(&s, &p)| s + p)
            .collect();
        let makespan = completion_times.iter().copied().max().unwrap_or(0);
        Self {
            start_times,
            completion_times,
            makespan,
        }
    }

    pub fn makespan(&self) -> Time {
        self.makespan
    }

    /// One `id start finish` line per activity (1-based ids) followed by a
    /// `makespan N` footer.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (s, c)) in self
            .start_times
            .iter()
            .zip(&self.completion_times)
            .enumerate()
        {
            let _ = writeln!(out, "{} {s} {c}", i + 1);
        }
        let _ = writeln!(out, "makespan {}", self.makespan);
        out
    }

    /// Reads the format written by [`Schedule::to_text`]. Values are taken
    /// as written so that a validator can judge them.
    pub fn from_text(text: &str) -> Result<Self, ScheduleTextError> {
        let mut start_times = Vec::new();
        let mut completion_times = Vec::new();
        let mut makespan = None;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || ScheduleTextError { line: idx + 1 };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["makespan", value] => makespan = Some(value.parse().map_err(|_| bad())?),
                [id, start, finish] if makespan.is_none() => {
                    let id: usize = id.parse().map_err(|_| bad())?;
                    if id != start_times.len() + 1 {
                        return Err(bad());
                    }
                    start_times.push(start.parse().map_err(|_| bad())?);
                    completion_times.push(finish.parse().map_err(|_| bad())?);
                }
                _ => return Err(bad()),
            }
        }
        let makespan = makespan.ok_or(ScheduleTextError {
            line: text.lines().count() + 1,
        })?;
        Ok(Self {
            start_times,
            completion_times,
            makespan,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed schedule line {line}")]
pub struct ScheduleTextError {
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    List(#[from] ListError),
}

/// Decodes `list` with the serial schedule generation scheme: in list order,
/// each activity starts at the earliest time that is no earlier than the
/// completion of its predecessors and at which its whole duration fits into
/// the remaining capacity.
pub fn serial_sgs(list: &ActivityList, instance: &Instance) -> Result<Schedule, ScheduleError> {
    // Re-validate: the list may belong to another instance.
    let list = ActivityList::new(list.as_slice().to_vec(), instance)?;
    let mut decoder = Decoder::new(instance);
    let profile = decoder.decode(list.as_slice());
    Ok(Schedule::from_start_times(instance, profile.start.clone()))
}

/// A broken schedule invariant. Activities and resources are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Length {
        expected: usize,
        got: usize,
    },
    Completion {
        activity: usize,
    },
    Makespan {
        stated: Time,
        actual: Time,
    },
    Precedence {
        predecessor: usize,
        successor: usize,
    },
    Resource {
        resource: usize,
        time: Time,
        used: u64,
        capacity: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Length { expected, got } => {
                write!(f, "expected {expected} activities, schedule has {got}")
            }
            Violation::Completion { activity } => write!(
                f,
                "activity {activity}: completion differs from start + duration"
            ),
            Violation::Makespan { stated, actual } => {
                write!(f, "makespan {stated} stated, {actual} actual")
            }
            Violation::Precedence {
                predecessor,
                successor,
            } => {
                write!(
                    f,
                    "activity {successor} starts before predecessor {predecessor} completes"
                )
            }
            Violation::Resource {
                resource,
                time,
                used,
                capacity,
            } => {
                write!(
                    f,
                    "resource {resource} at time {time}: {used} used, capacity {capacity}"
                )
            }
        }
    }
}

/// Checks every schedule invariant slot by slot. Shares no code with the
/// decoder. An empty result means the schedule is feasible.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> Vec<Violation> {
    let n = instance.activity_count();
    let mut violations = Vec::new();
    for got in [schedule.start_times.len(), schedule.completion_times.len()] {
        if got != n {
            violations.push(Violation::Length { expected: n, got });
            return violations;
        }
    }
    let start = &schedule.start_times;
    for (i, (&s, &c)) in start.iter().zip(&schedule.completion_times).enumerate() {
        if u64::from(s) + u64::from(instance.duration(i)) != u64::from(c) {
            violations.push(Violation::Completion { activity: i + 1 });
        }
    }
    let actual = (0..n)
        .map(|i| start[i].saturating_add(instance.duration(i)))
        .max()
        .unwrap_or(0);
    if schedule.makespan != actual {
        violations.push(Violation::Makespan {
            stated: schedule.makespan,
            actual,
        });
    }
    for i in 0..n {
        let finish = u64::from(start[i]) + u64::from(instance.duration(i));
        for &j in instance.successors(i) {
            if u64::from(start[j]) < finish {
                violations.push(Violation::Precedence {
                    predecessor: i + 1,
                    successor: j + 1,
                });
            }
        }
    }
    for k in 0..instance.resource_count() {
        let capacity = instance.capacities()[k];
        for t in 0..actual {
            let used: u64 = (0..n)
                .filter(|&i| start[i] <= t && t < start[i] + instance.duration(i))
                .map(|i| u64::from(instance.demands(i)[k]))
                .sum();
            if used > u64::from(capacity) {
                violations.push(Violation::Resource {
                    resource: k + 1,
                    time: t,
                    used,
                    capacity,
                });
            }
        }
    }
    violations
}
