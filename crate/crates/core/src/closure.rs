//! Transitive closure of the precedence relation.
//!
//! Insertion windows and swap legality are answered from these sets on every
//! move, so they are stored as one bitset per activity in each direction.

use fixedbitset::FixedBitSet;
use thiserror::Error;

/// The precedence graph contains a cycle through `activity` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("precedence relation contains a cycle through activity {activity}")]
pub struct CycleError {
    pub activity: usize,
}

/// Full ancestor/descendant relation of a precedence DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceClosure {
    predecessors: Vec<FixedBitSet>,
    successors: Vec<FixedBitSet>,
}

impl PrecedenceClosure {
    /// Builds the closure from 0-based direct successor lists.
    ///
    /// Successor indices must be in range; callers that accept untrusted data
    /// check that first.
    pub fn from_successors(successors: &[Vec<usize>]) -> Result<Self, CycleError> {
        let order = topological_order(successors)?;
        Ok(Self::from_order(successors, &order))
    }

    pub(crate) fn from_order(successors: &[Vec<usize>], order: &[usize]) -> Self {
        let n = successors.len();
        let mut succ = vec![FixedBitSet::with_capacity(n); n];
        for &i in order.iter().rev() {
            let mut reach = FixedBitSet::with_capacity(n);
            for &j in &successors[i] {
                reach.insert(j);
                reach.union_with(&succ[j]);
            }
            succ[i] = reach;
        }
        let mut pred = vec![FixedBitSet::with_capacity(n); n];
        for (i, set) in succ.iter().enumerate() {
            for j in set.ones() {
                pred[j].insert(i);
            }
        }
        Self {
            predecessors: pred,
            successors: succ,
        }
    }

    pub fn len(&self) -> usize {
        self.successors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.successors.is_empty()
    }

    /// All activities that must finish before `activity` starts.
    pub fn predecessors(&self, activity: usize) -> &FixedBitSet {
        &self.predecessors[activity]
    }

    /// All activities that may only start after `activity` finishes.
    pub fn successors(&self, activity: usize) -> &FixedBitSet {
        &self.successors[activity]
    }

    /// `true` if `before` is a (transitive) predecessor of `after`.
    #[inline]
    pub fn precedes(&self, before: usize, after: usize) -> bool {
        self.successors[before].contains(after)
    }

    /// `true` if the two activities are ordered either way.
    #[inline]
    pub fn related(&self, a: usize, b: usize) -> bool {
        self.precedes(a, b) || self.precedes(b, a)
    }
}

/// Kahn's algorithm over 0-based successor lists.
pub(crate) fn topological_order(successors: &[Vec<usize>]) -> Result<Vec<usize>, CycleError> {
    let n = successors.len();
    let mut indegree = vec![0usize; n];
    for succ in successors {
        for &j in succ {
            indegree[j] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).rev().filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop() {
        order.push(i);
        for &j in successors[i].iter().rev() {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(j);
            }
        }
    }
    if order.len() < n {
        let activity = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(CycleError {
            activity: activity + 1,
        });
    }
    Ok(order)
}
