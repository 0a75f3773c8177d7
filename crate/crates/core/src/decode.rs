//! Serial schedule generation over a time-indexed resource profile.
//!
//! [`Decoder`] owns the scratch buffers so that the search loops decode
//! thousands of lists without allocating. Lists that contain every activity
//! honour direct precedence edges; partial lists honour the transitive
//! closure restricted to their members, which is what decoding the induced
//! sub-project means.

use crate::construction::InsertionWindow;
use crate::instance::{Instance, Time};

/// Resource usage per time slot plus start/finish of every placed activity.
#[derive(Debug, Clone)]
pub(crate) struct Profile {
    resources: usize,
    usage: Vec<u32>,
    /// Slots `[0, touched)` may hold non-zero usage.
    touched: usize,
    pub(crate) start: Vec<Time>,
    pub(crate) finish: Vec<Time>,
    pub(crate) makespan: Time,
}

impl Profile {
    pub(crate) fn new(instance: &Instance) -> Self {
        let slots = instance.total_duration() as usize + 1;
        let n = instance.activity_count();
        Self {
            resources: instance.resource_count(),
            usage: vec![0; slots * instance.resource_count()],
            touched: 0,
            start: vec![0; n],
            finish: vec![0; n],
            makespan: 0,
        }
    }

    pub(crate) fn clear(&mut self) {
        self.usage[..self.touched * self.resources].fill(0);
        self.touched = 0;
        self.start.fill(0);
        self.finish.fill(0);
        self.makespan = 0;
    }

    /// Overwrites `self` with `other` without reallocating.
    pub(crate) fn copy_from(&mut self, other: &Profile) {
        let r = self.resources;
        if self.touched > other.touched {
            self.usage[other.touched * r..self.touched * r].fill(0);
        }
        self.usage[..other.touched * r].copy_from_slice(&other.usage[..other.touched * r]);
        self.touched = other.touched;
        self.start.copy_from_slice(&other.start);
        self.finish.copy_from_slice(&other.finish);
        self.makespan = other.makespan;
    }

    /// Places `activity` at its earliest precedence- and resource-feasible
    /// start, no earlier than the finish of any activity in `predecessors`,
    /// and returns that start. Unplaced activities have finish 0.
    pub(crate) fn place(
        &mut self,
        instance: &Instance,
        activity: usize,
        predecessors: &[usize],
    ) -> Time {
        let release = predecessors
            .iter()
            .map(|&p| self.finish[p])
            .max()
            .unwrap_or(0);
        self.place_from(instance, activity, release)
    }

    fn place_from(&mut self, instance: &Instance, activity: usize, release: Time) -> Time {
        let duration = instance.duration(activity);
        let demand = instance.demand_pairs(activity);
        let start = self.earliest_fit(instance, demand, duration, release);
        let finish = start + duration;
        if duration > 0 && !demand.is_empty() {
            let r = self.resources;
            for slot in start as usize..finish as usize {
                let row = &mut self.usage[slot * r..slot * r + r];
                for &(k, d) in demand {
                    row[k] += d;
                }
            }
            self.touched = self.touched.max(finish as usize);
        }
        self.start[activity] = start;
        self.finish[activity] = finish;
        self.makespan = self.makespan.max(finish);
        start
    }

    fn earliest_fit(
        &self,
        instance: &Instance,
        demand: &[(usize, u32)],
        duration: Time,
        release: Time,
    ) -> Time {
        if duration == 0 || demand.is_empty() {
            return release;
        }
        let r = self.resources;
        let caps = instance.capacities();
        let mut start = release as usize;
        loop {
            // Beyond `touched` every slot is free.
            let end = (start + duration as usize).min(self.touched);
            let conflict = (start..end).find(|&slot| {
                let row = &self.usage[slot * r..slot * r + r];
                demand.iter().any(|&(k, d)| row[k] + d > caps[k])
            });
            match conflict {
                Some(slot) => start = slot + 1,
                None => return start as Time,
            }
        }
    }

    /// Usage of `resource` at time `slot`.
    #[cfg(test)]
    pub(crate) fn usage(&self, slot: usize, resource: usize) -> u32 {
        if slot >= self.touched {
            0
        } else {
            self.usage[slot * self.resources + resource]
        }
    }
}

/// Reusable serial-SGS evaluator bound to one instance.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    instance: &'a Instance,
    base: Profile,
    trial: Profile,
    /// Per activity, the members a partial list must wait for: direct
    /// predecessors, with absent ones replaced by their own such sets.
    frontier: Vec<Vec<usize>>,
    member: Vec<bool>,
    evaluations: u64,
}

impl<'a> Decoder<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Self {
            instance,
            base: Profile::new(instance),
            trial: Profile::new(instance),
            frontier: vec![Vec::new(); instance.activity_count()],
            member: vec![false; instance.activity_count()],
            evaluations: 0,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    /// Number of list evaluations performed so far. Every candidate position
    /// scored by [`Decoder::best_positions`] counts as one.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Makespan of a precedence-feasible list (complete or partial).
    pub fn makespan(&mut self, order: &[usize]) -> Time {
        self.evaluations += 1;
        let instance = self.instance;
        let full = order.len() == instance.activity_count();
        if !full {
            self.set_members(order.iter().copied());
        }
        let profile = &mut self.base;
        profile.clear();
        for &a in order {
            let preds = if full {
                instance.predecessors(a)
            } else {
                &self.frontier[a]
            };
            profile.place(instance, a, preds);
        }
        profile.makespan
    }

    /// Rebuilds `frontier` for the given member set. Waiting for the
    /// frontier is equivalent to waiting for every member that is a
    /// transitive predecessor, because members are placed after their own
    /// frontier.
    fn set_members(&mut self, members: impl Iterator<Item = usize>) {
        let instance = self.instance;
        self.member.fill(false);
        for a in members {
            self.member[a] = true;
        }
        for &x in instance.topological_order() {
            let mut list = std::mem::take(&mut self.frontier[x]);
            list.clear();
            let mut merged = false;
            for &p in instance.predecessors(x) {
                if self.member[p] {
                    list.push(p);
                } else {
                    list.extend_from_slice(&self.frontier[p]);
                    merged = true;
                }
            }
            if merged {
                list.sort_unstable();
                list.dedup();
            }
            self.frontier[x] = list;
        }
    }

    /// Decodes `order` and returns the per-activity start times.
    pub(crate) fn decode(&mut self, order: &[usize]) -> &Profile {
        self.makespan(order);
        &self.base
    }

    /// Scores inserting `activity` at every position of `window` in
    /// `partial` and returns the minimum decoded makespan together with all
    /// positions attaining it, in increasing order.
    ///
    /// The prefix before each position is decoded once and shared; a trial
    /// is abandoned as soon as it exceeds the best makespan seen so far, so
    /// the returned set is exact.
    pub fn best_positions(
        &mut self,
        partial: &[usize],
        activity: usize,
        window: InsertionWindow,
        positions: &mut Vec<usize>,
    ) -> Time {
        debug_assert!(window.low <= window.high && window.high <= partial.len());
        let instance = self.instance;
        if partial.len() + 1 < instance.activity_count() {
            self.set_members(partial.iter().copied().chain(std::iter::once(activity)));
        } else {
            for (x, preds) in self.frontier.iter_mut().enumerate() {
                preds.clear();
                preds.extend_from_slice(instance.predecessors(x));
            }
        }
        let frontier = &self.frontier;
        positions.clear();
        self.base.clear();
        for &a in &partial[..window.low] {
            self.base.place(instance, a, &frontier[a]);
        }
        let mut best = Time::MAX;
        for pos in window.low..=window.high {
            self.evaluations += 1;
            self.trial.copy_from(&self.base);
            self.trial.place(instance, activity, &frontier[activity]);
            let mut pruned = self.trial.makespan > best;
            if !pruned {
                for &a in &partial[pos..] {
                    self.trial.place(instance, a, &frontier[a]);
                    if self.trial.makespan > best {
                        pruned = true;
                        break;
                    }
                }
            }
            if !pruned {
                if self.trial.makespan < best {
                    best = self.trial.makespan;
                    positions.clear();
                }
                positions.push(pos);
            }
            if pos < partial.len() {
                self.base
                    .place(instance, partial[pos], &frontier[partial[pos]]);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_parallel(capacity: u32) -> Instance {
        Instance::new(
            "pair",
            vec![0, 3, 2, 0],
            vec![vec![0], vec![1], vec![1], vec![0]],
            vec![capacity],
            vec![vec![1, 2], vec![3], vec![3], vec![]],
            5,
        )
        .unwrap()
    }

    #[test]
    fn capacity_one_serializes() {
        let inst = two_parallel(1);
        let mut dec = Decoder::new(&inst);
        let p = dec.decode(&[0, 1, 2, 3]);
        assert_eq!(&p.start[1..3], &[0, 3]);
        assert_eq!(p.makespan, 5);
    }

    #[test]
    fn capacity_two_runs_in_parallel() {
        let inst = two_parallel(2);
        let mut dec = Decoder::new(&inst);
        let p = dec.decode(&[0, 1, 2, 3]);
        assert_eq!(&p.start[1..3], &[0, 0]);
        assert_eq!(p.makespan, 3);
    }

    #[test]
    fn profile_usage_tracks_placements() {
        let inst = two_parallel(2);
        let mut p = Profile::new(&inst);
        p.place(&inst, 0, &[]);
        p.place(&inst, 1, &[0]);
        p.place(&inst, 2, &[0]);
        assert_eq!(p.usage(0, 0), 2);
        assert_eq!(p.usage(2, 0), 1);
        assert_eq!(p.usage(3, 0), 0);
    }

    #[test]
    fn copy_from_resets_stale_slots() {
        let inst = two_parallel(1);
        let mut a = Profile::new(&inst);
        let mut b = Profile::new(&inst);
        b.place(&inst, 1, &[]);
        b.place(&inst, 2, &[]);
        b.copy_from(&a);
        assert_eq!(b.usage(0, 0), 0);
        a.place(&inst, 2, &[]);
        b.copy_from(&a);
        assert_eq!(b.usage(1, 0), 1);
        assert_eq!(b.usage(3, 0), 0);
    }

    #[test]
    fn best_positions_matches_full_decodes() {
        let inst = two_parallel(1);
        let mut dec = Decoder::new(&inst);
        let mut positions = Vec::new();
        let best = dec.best_positions(
            &[0, 1, 3],
            2,
            InsertionWindow { low: 1, high: 2 },
            &mut positions,
        );
        assert_eq!(best, 5);
        assert_eq!(positions, vec![1, 2]);
        assert_eq!(dec.evaluations(), 2);
    }
}
