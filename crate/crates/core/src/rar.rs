//! Remove-and-reinsert local search.
//!
//! Every iteration copies the current list, removes `m_remove` random
//! activities and reinserts them one by one, in removal order, each at a
//! position of minimum decoded makespan. The candidate replaces the current
//! list only if it is strictly shorter, or after `stagnation_threshold`
//! consecutive iterations without such an improvement.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::construction::{
    best_insertion_construct, check_range, default_seed_size, insert_best, ConfigError,
    PartialList, DEFAULT_NODE_BUDGET,
};
use crate::decode::Decoder;
use crate::instance::{Instance, Time};
use crate::report::{Recorder, RunReport, Step};
use crate::schedule::ActivityList;

pub const DEFAULT_STAGNATION: usize = 50;
pub const DEFAULT_ITERATIONS: usize = 3000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    /// Activities removed and reinserted per iteration.
    pub m_remove: usize,
    pub max_iterations: usize,
    /// Non-improving iterations after which the candidate is taken anyway.
    pub stagnation_threshold: usize,
    pub seed: u64,
    /// Size of the exactly solved subset used by the construction.
    pub construction_m: usize,
    /// Node limit for the exact subset solver.
    pub node_budget: u64,
    /// Optional cap on serial-SGS evaluations; the run stops at the end of
    /// the iteration that reaches it.
    pub evaluation_budget: Option<u64>,
}

/// `max(1, round(n_real / 10))`.
pub fn default_removal_count(instance: &Instance) -> usize {
    ((instance.real_activity_count() + 5) / 10).max(1)
}

impl SearchConfig {
    pub fn for_instance(instance: &Instance) -> Self {
        Self {
            m_remove: default_removal_count(instance).min(instance.real_activity_count().max(1)),
            max_iterations: DEFAULT_ITERATIONS,
            stagnation_threshold: DEFAULT_STAGNATION,
            seed: 0,
            construction_m: default_seed_size(instance),
            node_budget: DEFAULT_NODE_BUDGET,
            evaluation_budget: None,
        }
    }

    pub fn validate(&self, instance: &Instance) -> Result<(), ConfigError> {
        let n = instance.real_activity_count();
        check_range("m_remove", self.m_remove, 1, n)?;
        check_range("construction_m", self.construction_m, 1, n)?;
        check_range("max_iterations", self.max_iterations, 1, usize::MAX)?;
        check_range(
            "stagnation_threshold",
            self.stagnation_threshold,
            1,
            usize::MAX,
        )?;
        Ok(())
    }
}

/// Removes `m` uniformly chosen non-dummy activities from `list`.
///
/// The returned sequence is in uniformly random order and is the order in
/// which the activities are reinserted.
pub fn remove_activities<R: Rng + ?Sized>(
    list: &ActivityList,
    instance: &Instance,
    m: usize,
    rng: &mut R,
) -> Result<(PartialList, Vec<usize>), ConfigError> {
    check_range("m_remove", m, 0, instance.real_activity_count())?;
    let mut pool: Vec<usize> = instance.real_activities().collect();
    let (chosen, _) = pool.partial_shuffle(rng, m);
    let removed = chosen.to_vec();
    let mut gone = vec![false; instance.activity_count()];
    for &a in &removed {
        gone[a] = true;
    }
    let kept = list
        .as_slice()
        .iter()
        .copied()
        .filter(|&a| !gone[a])
        .collect();
    Ok((PartialList::new(kept, instance.activity_count()), removed))
}

/// Inserts `activity` at a uniformly chosen position among those of minimum
/// decoded makespan. Returns the chosen position.
pub fn reinsert_best<R: Rng + ?Sized>(
    partial: &mut PartialList,
    activity: usize,
    decoder: &mut Decoder<'_>,
    rng: &mut R,
) -> usize {
    let mut scratch = Vec::new();
    insert_best(partial, activity, decoder, rng, &mut scratch)
        .expect("partial lists derived from feasible lists stay feasible")
        .0
}

/// Candidate produced by one remove-and-reinsert cycle.
#[derive(Debug, Clone)]
pub struct RarMove {
    pub list: ActivityList,
    pub makespan: Time,
    /// Removed activities, sorted.
    pub removed: Vec<usize>,
}

/// One remove-and-reinsert cycle on a copy of `current`.
pub fn rar_iteration<R: Rng + ?Sized>(
    current: &ActivityList,
    m_remove: usize,
    decoder: &mut Decoder<'_>,
    rng: &mut R,
) -> Result<RarMove, ConfigError> {
    let instance = decoder.instance();
    let (mut partial, mut removed) = remove_activities(current, instance, m_remove, rng)?;
    let mut scratch = Vec::new();
    let mut makespan = None;
    for &a in &removed {
        let (_, ms) = insert_best(&mut partial, a, decoder, rng, &mut scratch)
            .expect("partial lists derived from feasible lists stay feasible");
        makespan = Some(ms);
    }
    let list = partial.into_list();
    // With nothing removed the list was never decoded.
    let makespan = match makespan {
        Some(ms) => ms,
        None => decoder.makespan(list.as_slice()),
    };
    removed.sort_unstable();
    Ok(RarMove {
        list,
        makespan,
        removed,
    })
}

/// Constructs an initial list and improves it by remove-and-reinsert.
pub fn rar_search(instance: &Instance, config: &SearchConfig) -> Result<RunReport, ConfigError> {
    config.validate(instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut decoder = Decoder::new(instance);
    let mut current = best_insertion_construct(
        &mut decoder,
        config.construction_m,
        config.node_budget,
        &mut rng,
    )?;
    let mut current_makespan = decoder.makespan(current.as_slice());
    let mut recorder = Recorder::new(current.as_slice(), current_makespan, config.max_iterations);
    let mut stagnant = 0;

    for _ in 0..config.max_iterations {
        if config
            .evaluation_budget
            .is_some_and(|b| decoder.evaluations() >= b)
        {
            break;
        }
        let candidate = rar_iteration(&current, config.m_remove, &mut decoder, &mut rng)?;
        debug_assert!(crate::schedule::is_precedence_feasible_list(
            candidate.list.as_slice(),
            instance.closure()
        ));
        let step = if candidate.makespan < current_makespan {
            stagnant = 0;
            Step::Accepted
        } else {
            stagnant += 1;
            if stagnant >= config.stagnation_threshold {
                stagnant = 0;
                Step::Restarted
            } else {
                Step::Rejected
            }
        };
        if step != Step::Rejected {
            current = candidate.list;
            current_makespan = candidate.makespan;
        }
        recorder.record(
            candidate.makespan,
            current.as_slice(),
            current_makespan,
            step,
        );
    }
    Ok(recorder.finish(decoder.evaluations()))
}
