//! Initial solution: solve a random subset of activities exactly, then insert
//! the remaining activities one at a time at a best position.

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::closure::PrecedenceClosure;
use crate::decode::{Decoder, Profile};
use crate::instance::{Instance, Time};
use crate::schedule::ActivityList;

/// Default node limit of [`bnb_exact`].
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{what} must be between {min} and {max}, got {got}")]
    OutOfRange {
        what: &'static str,
        min: usize,
        max: usize,
        got: usize,
    },
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn check_range(
    what: &'static str,
    got: usize,
    min: usize,
    max: usize,
) -> Result<(), ConfigError> {
    if got < min || got > max {
        return Err(ConfigError::OutOfRange {
            what,
            min,
            max,
            got,
        });
    }
    Ok(())
}

/// `clamp(round(n_real / 10), 10, 25)`, capped at the number of real activities.
pub fn default_seed_size(instance: &Instance) -> usize {
    let n = instance.real_activity_count();
    ((n + 5) / 10).clamp(10, 25).min(n).max(1.min(n))
}

/// Draws `m` distinct non-dummy activities uniformly at random, returned in
/// increasing order.
pub fn select_seed_subset<R: Rng + ?Sized>(
    instance: &Instance,
    m: usize,
    rng: &mut R,
) -> Result<Vec<usize>, ConfigError> {
    check_range("seed subset size", m, 1, instance.real_activity_count())?;
    let mut pool: Vec<usize> = instance.real_activities().collect();
    let (chosen, _) = pool.partial_shuffle(rng, m);
    let mut subset = chosen.to_vec();
    subset.sort_unstable();
    Ok(subset)
}

/// A sub-project together with the original index of each of its activities.
#[derive(Debug, Clone)]
pub struct SubInstance {
    pub instance: Instance,
    /// `original[i]` is the activity of the full project behind sub-activity
    /// `i`. Entries 0 and the last refer to the full project's dummies.
    pub original: Vec<usize>,
}

/// The RCPSP restricted to `subset` plus fresh dummies. Two members are
/// ordered whenever the full project orders them, directly or transitively.
pub fn induced_subinstance(
    instance: &Instance,
    subset: &[usize],
    closure: &PrecedenceClosure,
) -> SubInstance {
    let members: Vec<usize> = subset
        .iter()
        .copied()
        .filter(|&a| !instance.is_dummy(a))
        .collect();
    let m = members.len();
    let sink = m + 1;
    let mut successors = vec![Vec::new(); m + 2];
    let mut has_pred = vec![false; m + 2];
    for (i, &a) in members.iter().enumerate() {
        for (j, &b) in members.iter().enumerate() {
            if closure.precedes(a, b) {
                successors[i + 1].push(j + 1);
                has_pred[j + 1] = true;
            }
        }
    }
    for i in 1..=m {
        if !has_pred[i] {
            successors[0].push(i);
        }
        if successors[i].is_empty() {
            successors[i].push(sink);
        }
    }
    if m == 0 {
        successors[0].push(sink);
    }
    let mut original = Vec::with_capacity(m + 2);
    original.push(instance.source());
    original.extend(&members);
    original.push(instance.sink());

    let zero = vec![0; instance.resource_count()];
    let durations: Vec<Time> = original
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if i == 0 || i == sink {
                0
            } else {
                instance.duration(a)
            }
        })
        .collect();
    let demands = original
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if i == 0 || i == sink {
                zero.clone()
            } else {
                instance.demands(a).to_vec()
            }
        })
        .collect();
    let horizon = durations.iter().sum();
    let sub = Instance::new(
        format!("{}[{m}]", instance.name()),
        durations,
        demands,
        instance.capacities().to_vec(),
        successors,
        horizon,
    )
    .expect("a sub-project of a valid instance is valid");
    SubInstance {
        instance: sub,
        original,
    }
}

/// Result of [`bnb_exact`].
#[derive(Debug, Clone)]
pub struct BnbOutcome {
    pub list: ActivityList,
    pub makespan: Time,
    /// `true` if the search finished within its node budget.
    pub optimal: bool,
    pub nodes: u64,
}

/// Depth-first branch and bound over activity-list prefixes decoded with the
/// serial SGS.
///
/// Only lists whose decoded start times are non-decreasing (ties broken by
/// topological rank) are enumerated: for every active schedule, the list
/// sorted that way decodes back to it, and some optimal schedule is active.
/// A prefix is pruned once its makespan, or the start of the last placed
/// activity plus the remaining critical path of any unplaced activity,
/// reaches the incumbent.
pub fn bnb_exact(instance: &Instance, budget: u64) -> BnbOutcome {
    let n = instance.activity_count();
    let mut rank = vec![0; n];
    for (r, &a) in instance.topological_order().iter().enumerate() {
        rank[a] = r;
    }
    let mut decoder = Decoder::new(instance);
    let incumbent = instance.topological_order().to_vec();
    let best = decoder.makespan(&incumbent);

    let mut search = Bnb {
        instance,
        rank,
        budget,
        nodes: 0,
        exhausted: false,
        lower_bound: instance.critical_path_lower_bound(),
        best,
        best_list: incumbent,
        prefix: Vec::with_capacity(n),
        missing_preds: (0..n).map(|a| instance.predecessors(a).len()).collect(),
        placed: FixedBitSet::with_capacity(n),
    };
    if search.best > search.lower_bound {
        // One profile per depth: `levels[0]` is the state, `levels[1]` its child.
        let mut levels = vec![Profile::new(instance); n + 1];
        levels[0].place(instance, instance.source(), &[]);
        search.prefix.push(instance.source());
        search.mark(instance.source(), true);
        search.dfs(&mut levels, instance.source());
    }
    BnbOutcome {
        list: ActivityList::from_vec_unchecked(search.best_list),
        makespan: search.best,
        optimal: !search.exhausted,
        nodes: search.nodes,
    }
}

struct Bnb<'a> {
    instance: &'a Instance,
    rank: Vec<usize>,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    lower_bound: Time,
    best: Time,
    best_list: Vec<usize>,
    prefix: Vec<usize>,
    missing_preds: Vec<usize>,
    placed: FixedBitSet,
}

impl Bnb<'_> {
    fn mark(&mut self, activity: usize, placed: bool) {
        self.placed.set(activity, placed);
        for &s in self.instance.successors(activity) {
            if placed {
                self.missing_preds[s] -= 1;
            } else {
                self.missing_preds[s] += 1;
            }
        }
    }

    fn dfs(&mut self, levels: &mut [Profile], last: usize) {
        let inst = self.instance;
        let sink = inst.sink();
        let (state, deeper) = levels.split_at_mut(1);
        let state = &state[0];
        let last_key = (state.start[last], self.rank[last]);
        let eligible: Vec<usize> = inst
            .topological_order()
            .iter()
            .copied()
            .filter(|&a| !self.placed.contains(a) && self.missing_preds[a] == 0)
            .collect();

        if eligible == [sink] {
            if state.makespan < self.best {
                self.best = state.makespan;
                self.best_list = self.prefix.clone();
                self.best_list.push(sink);
            }
            return;
        }

        for a in eligible {
            if a == sink || self.exhausted || self.best <= self.lower_bound {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                return;
            }
            let child = &mut deeper[0];
            child.copy_from(state);
            let start = child.place(inst, a, inst.predecessors(a));
            if (start, self.rank[a]) < last_key || child.makespan >= self.best {
                continue;
            }
            // Every later activity starts no earlier than `start`.
            let bound = (0..inst.activity_count())
                .filter(|&j| j != a && !self.placed.contains(j))
                .map(|j| {
                    let release = inst
                        .predecessors(j)
                        .iter()
                        .map(|&p| child.finish[p])
                        .max()
                        .unwrap_or(0);
                    release.max(start) + inst.tail(j)
                })
                .max()
                .unwrap_or(0)
                .max(child.makespan);
            if bound >= self.best {
                continue;
            }
            self.prefix.push(a);
            self.mark(a, true);
            self.dfs(deeper, a);
            self.mark(a, false);
            self.prefix.pop();
        }
    }
}

/// Range of insertion indices `[low, high]`; inserting at index `p` places
/// the new activity before the element currently at `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertionWindow {
    pub low: usize,
    pub high: usize,
}

impl InsertionWindow {
    pub fn len(&self) -> usize {
        self.high + 1 - self.low
    }

    pub fn is_empty(&self) -> bool {
        self.high < self.low
    }

    pub fn contains(&self, position: usize) -> bool {
        self.low <= position && position <= self.high
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("activity {0} is already in the partial list")]
    AlreadyPresent(usize),
    #[error("partial list orders a successor of activity {0} before one of its predecessors")]
    InfeasiblePartial(usize),
}

/// A precedence-feasible sequence over a subset of the activities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialList {
    order: Vec<usize>,
    members: FixedBitSet,
}

impl PartialList {
    pub fn new(order: Vec<usize>, activity_count: usize) -> Self {
        let mut members = FixedBitSet::with_capacity(activity_count);
        for &a in &order {
            members.insert(a);
        }
        Self { order, members }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, activity: usize) -> bool {
        self.members.contains(activity)
    }

    pub fn insert(&mut self, position: usize, activity: usize) {
        self.order.insert(position, activity);
        self.members.insert(activity);
    }

    pub fn into_list(self) -> ActivityList {
        ActivityList::from_vec_unchecked(self.order)
    }
}

/// Positions at which `activity` can be inserted into `partial` without
/// ordering it before a transitive predecessor or after a transitive
/// successor already in the list.
pub fn feasible_insert_positions(
    partial: &PartialList,
    activity: usize,
    closure: &PrecedenceClosure,
) -> Result<InsertionWindow, WindowError> {
    if partial.contains(activity) {
        return Err(WindowError::AlreadyPresent(activity + 1));
    }
    let preds = closure.predecessors(activity);
    let succs = closure.successors(activity);
    let mut low = 0;
    let mut high = partial.len();
    for (i, &a) in partial.as_slice().iter().enumerate() {
        if preds.contains(a) {
            low = i + 1;
        } else if succs.contains(a) && high == partial.len() {
            high = i;
        }
    }
    if low > high {
        return Err(WindowError::InfeasiblePartial(activity + 1));
    }
    Ok(InsertionWindow { low, high })
}

/// Inserts `activity` at a position of minimum decoded makespan, chosen
/// uniformly among ties. Returns the chosen position and its makespan.
pub fn insert_best<R: Rng + ?Sized>(
    partial: &mut PartialList,
    activity: usize,
    decoder: &mut Decoder<'_>,
    rng: &mut R,
    scratch: &mut Vec<usize>,
) -> Result<(usize, Time), WindowError> {
    let window = feasible_insert_positions(partial, activity, decoder.instance().closure())?;
    let makespan = decoder.best_positions(partial.as_slice(), activity, window, scratch);
    let position = *scratch
        .choose(rng)
        .expect("a non-empty window has a best position");
    partial.insert(position, activity);
    debug_assert!(crate::schedule::is_precedence_feasible_list(
        partial.as_slice(),
        decoder.instance().closure()
    ));
    Ok((position, makespan))
}

/// Builds a complete activity list: an exact solution for a random subset of
/// `seed_size` activities, extended by best insertion of the others in
/// uniformly random order.
pub fn best_insertion_construct<R: Rng + ?Sized>(
    decoder: &mut Decoder<'_>,
    seed_size: usize,
    node_budget: u64,
    rng: &mut R,
) -> Result<ActivityList, ConfigError> {
    let instance = decoder.instance();
    let seed = select_seed_subset(instance, seed_size, rng)?;
    let sub = induced_subinstance(instance, &seed, instance.closure());
    let solved = bnb_exact(&sub.instance, node_budget);
    let order: Vec<usize> = solved
        .list
        .as_slice()
        .iter()
        .map(|&i| sub.original[i])
        .collect();
    let mut partial = PartialList::new(order, instance.activity_count());

    let mut remaining: Vec<usize> = instance
        .real_activities()
        .filter(|&a| !partial.contains(a))
        .collect();
    remaining.shuffle(rng);
    let mut scratch = Vec::new();
    for a in remaining {
        insert_best(&mut partial, a, decoder, rng, &mut scratch)
            .expect("construction keeps the partial list precedence-feasible");
    }
    Ok(partial.into_list())
}
