//! Baseline metaheuristics over two neighborhoods of an activity list:
//! precedence-preserving pair swaps ("multi-move") and remove-and-reinsert.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closure::PrecedenceClosure;
use crate::construction::{
    best_insertion_construct, check_range, default_seed_size, ConfigError, DEFAULT_NODE_BUDGET,
};
use crate::decode::Decoder;
use crate::instance::{Instance, Time};
use crate::rar::{default_removal_count, rar_iteration, DEFAULT_ITERATIONS};
use crate::report::{Recorder, RunReport, Step};
use crate::schedule::ActivityList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Driver {
    Tabu,
    Annealing,
    HillClimbing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Neighborhood {
    /// All precedence-preserving swaps of two list positions.
    MultiMove,
    /// One remove-and-reinsert cycle.
    RemoveReinsert,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaConfig {
    pub driver: Driver,
    pub neighborhood: Neighborhood,
    /// Neighborhood decisions for tabu search and hill climbing, sampled
    /// moves for simulated annealing.
    pub iterations: usize,
    pub tabu_tenure_min: usize,
    pub tabu_tenure_max: usize,
    pub initial_temperature: f64,
    pub cooling_ratio: f64,
    pub samples_per_temperature: usize,
    /// Activities removed by one remove-and-reinsert move.
    pub m_remove: usize,
    /// Remove-and-reinsert candidates drawn per tabu or hill-climbing
    /// iteration; that neighborhood is too large to enumerate.
    pub rar_samples: usize,
    pub construction_m: usize,
    pub node_budget: u64,
    pub seed: u64,
}

impl MetaConfig {
    pub fn new(driver: Driver, neighborhood: Neighborhood, instance: &Instance) -> Self {
        Self {
            driver,
            neighborhood,
            iterations: DEFAULT_ITERATIONS,
            tabu_tenure_min: 10,
            tabu_tenure_max: 15,
            initial_temperature: 2.0,
            cooling_ratio: 0.99,
            samples_per_temperature: 100,
            m_remove: default_removal_count(instance).min(instance.real_activity_count().max(1)),
            rar_samples: 8,
            construction_m: default_seed_size(instance),
            node_budget: DEFAULT_NODE_BUDGET,
            seed: 0,
        }
    }

    pub fn validate(&self, instance: &Instance) -> Result<(), ConfigError> {
        let n = instance.real_activity_count();
        check_range("iterations", self.iterations, 1, usize::MAX)?;
        check_range("construction_m", self.construction_m, 1, n)?;
        if self.neighborhood == Neighborhood::RemoveReinsert {
            check_range("m_remove", self.m_remove, 1, n)?;
            check_range("rar_samples", self.rar_samples, 1, usize::MAX)?;
        }
        if self.tabu_tenure_min > self.tabu_tenure_max {
            return Err(ConfigError::Invalid(format!(
                "tabu tenure range [{}, {}] is empty",
                self.tabu_tenure_min, self.tabu_tenure_max
            )));
        }
        if !(self.cooling_ratio > 0.0 && self.cooling_ratio < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "cooling ratio {} is not in (0, 1)",
                self.cooling_ratio
            )));
        }
        if self.initial_temperature.is_nan() || self.initial_temperature <= 0.0 {
            return Err(ConfigError::Invalid(format!(
                "initial temperature {} is not positive",
                self.initial_temperature
            )));
        }
        check_range(
            "samples_per_temperature",
            self.samples_per_temperature,
            1,
            usize::MAX,
        )?;
        Ok(())
    }
}

/// Swap of the activities at list positions `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwapMove {
    pub p: usize,
    pub q: usize,
    /// Activity at position `p` before the swap.
    pub i: usize,
    /// Activity at position `q` before the swap.
    pub j: usize,
}

impl SwapMove {
    pub fn apply(&self, order: &mut [usize]) {
        order.swap(self.p, self.q);
    }

    /// Unordered activity pair, the tabu attribute of the move.
    pub fn pair(&self) -> (usize, usize) {
        (self.i.min(self.j), self.i.max(self.j))
    }
}

/// All swaps of two positions that keep the list precedence-feasible. The
/// first and last positions (the dummies) never move.
///
/// Swapping positions `p < q` is legal iff the activity at `q` has no
/// transitive predecessor in `p..q` and the activity at `p` has no
/// transitive successor in `p+1..=q`.
pub fn swap_neighborhood(list: &[usize], closure: &PrecedenceClosure) -> Vec<SwapMove> {
    let mut moves = Vec::new();
    let len = list.len();
    if len < 4 {
        return moves;
    }
    for p in 1..len - 2 {
        let i = list[p];
        let succs = closure.successors(i);
        for q in p + 1..len - 1 {
            let j = list[q];
            // Once a successor of `i` lies in (p, q], no larger q works.
            if succs.contains(j) {
                break;
            }
            let preds = closure.predecessors(j);
            if list[p + 1..q].iter().all(|&x| !preds.contains(x)) {
                moves.push(SwapMove { p, q, i, j });
            }
        }
    }
    moves
}

/// Metropolis test for a move that worsens the cost by `delta > 0`.
pub fn accept_worsening<R: Rng + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> bool {
    if delta <= 0.0 {
        return true;
    }
    if temperature <= 0.0 {
        return false;
    }
    rng.gen::<f64>() < (-delta / temperature).exp()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Attribute {
    Pair(usize, usize),
    Removed(Vec<usize>),
}

/// Move attributes forbidden until a given iteration.
#[derive(Debug, Clone)]
pub struct TabuList {
    min_tenure: usize,
    max_tenure: usize,
    until: HashMap<Attribute, usize>,
}

impl TabuList {
    pub fn new(min_tenure: usize, max_tenure: usize) -> Self {
        Self {
            min_tenure,
            max_tenure,
            until: HashMap::new(),
        }
    }

    /// Forbids `attribute` for a tenure drawn uniformly from the configured
    /// range, starting after `iteration`. Returns the tenure.
    fn forbid<R: Rng + ?Sized>(
        &mut self,
        attribute: Attribute,
        iteration: usize,
        rng: &mut R,
    ) -> usize {
        let tenure = rng.gen_range(self.min_tenure..=self.max_tenure);
        self.until.insert(attribute, iteration + tenure);
        if self.until.len() > 4 * self.max_tenure + 16 {
            self.until.retain(|_, &mut end| end > iteration);
        }
        tenure
    }

    fn is_tabu(&self, attribute: &Attribute, iteration: usize) -> bool {
        self.until
            .get(attribute)
            .is_some_and(|&end| iteration <= end)
    }

    /// Forbids the swap of activities `a` and `b`; returns the drawn tenure.
    pub fn forbid_pair<R: Rng + ?Sized>(
        &mut self,
        a: usize,
        b: usize,
        iteration: usize,
        rng: &mut R,
    ) -> usize {
        self.forbid(Attribute::Pair(a.min(b), a.max(b)), iteration, rng)
    }

    pub fn is_pair_tabu(&self, a: usize, b: usize, iteration: usize) -> bool {
        self.is_tabu(&Attribute::Pair(a.min(b), a.max(b)), iteration)
    }
}

struct Candidate {
    list: Vec<usize>,
    makespan: Time,
    attribute: Attribute,
}

/// Shared state of one metaheuristic run.
struct Run<'a> {
    instance: &'a Instance,
    config: &'a MetaConfig,
    decoder: Decoder<'a>,
    rng: ChaCha8Rng,
    current: ActivityList,
    current_makespan: Time,
    recorder: Recorder,
}

impl<'a> Run<'a> {
    fn start(instance: &'a Instance, config: &'a MetaConfig) -> Result<Self, ConfigError> {
        config.validate(instance)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut decoder = Decoder::new(instance);
        let current = best_insertion_construct(
            &mut decoder,
            config.construction_m,
            config.node_budget,
            &mut rng,
        )?;
        let current_makespan = decoder.makespan(current.as_slice());
        let recorder = Recorder::new(current.as_slice(), current_makespan, config.iterations);
        Ok(Self {
            instance,
            config,
            decoder,
            rng,
            current,
            current_makespan,
            recorder,
        })
    }

    fn evaluate_swap(&mut self, mv: SwapMove) -> Candidate {
        let mut list = self.current.as_slice().to_vec();
        mv.apply(&mut list);
        let makespan = self.decoder.makespan(&list);
        let (a, b) = mv.pair();
        Candidate {
            list,
            makespan,
            attribute: Attribute::Pair(a, b),
        }
    }

    fn sample_rar(&mut self) -> Candidate {
        let mv = rar_iteration(
            &self.current,
            self.config.m_remove,
            &mut self.decoder,
            &mut self.rng,
        )
        .expect("m_remove validated");
        Candidate {
            list: mv.list.into_vec(),
            makespan: mv.makespan,
            attribute: Attribute::Removed(mv.removed),
        }
    }

    /// Full swap neighborhood, or `rar_samples` remove-and-reinsert moves.
    fn neighbors(&mut self) -> Vec<Candidate> {
        match self.config.neighborhood {
            Neighborhood::MultiMove => {
                swap_neighborhood(self.current.as_slice(), self.instance.closure())
                    .into_iter()
                    .map(|mv| self.evaluate_swap(mv))
                    .collect()
            }
            Neighborhood::RemoveReinsert => (0..self.config.rar_samples)
                .map(|_| self.sample_rar())
                .collect(),
        }
    }

    /// One uniformly drawn neighbor, `None` if the neighborhood is empty.
    fn random_neighbor(&mut self) -> Option<Candidate> {
        match self.config.neighborhood {
            Neighborhood::MultiMove => {
                let moves = swap_neighborhood(self.current.as_slice(), self.instance.closure());
                let mv = *moves.choose(&mut self.rng)?;
                Some(self.evaluate_swap(mv))
            }
            Neighborhood::RemoveReinsert => Some(self.sample_rar()),
        }
    }

    fn adopt(&mut self, candidate: Candidate) {
        debug_assert!(crate::schedule::is_precedence_feasible_list(
            &candidate.list,
            self.instance.closure()
        ));
        self.current = ActivityList::from_vec_unchecked(candidate.list);
        self.current_makespan = candidate.makespan;
    }

    fn record(&mut self, candidate: Time, step: Step) {
        self.recorder.record(
            candidate,
            self.current.as_slice(),
            self.current_makespan,
            step,
        );
    }

    fn finish(self) -> RunReport {
        let evaluations = self.decoder.evaluations();
        self.recorder.finish(evaluations)
    }
}

/// Runs the configured driver.
pub fn run_metaheuristic(
    instance: &Instance,
    config: &MetaConfig,
) -> Result<RunReport, ConfigError> {
    match config.driver {
        Driver::Tabu => tabu_search(instance, config),
        Driver::Annealing => simulated_annealing(instance, config),
        Driver::HillClimbing => hill_climbing(instance, config),
    }
}

/// Moves to the best admissible neighbor every iteration, even if it is
/// worse. A neighbor is admissible unless its move attribute is tabu; tabu
/// moves that beat the best makespan found so far are admitted anyway.
pub fn tabu_search(instance: &Instance, config: &MetaConfig) -> Result<RunReport, ConfigError> {
    let mut run = Run::start(instance, config)?;
    let mut tabu = TabuList::new(config.tabu_tenure_min, config.tabu_tenure_max);
    for iteration in 1..=config.iterations {
        let best = run.recorder.best();
        let neighbors = run.neighbors();
        let admissible: Vec<Candidate> = neighbors
            .into_iter()
            .filter(|c| c.makespan < best || !tabu.is_tabu(&c.attribute, iteration))
            .collect();
        let Some(min) = admissible.iter().map(|c| c.makespan).min() else {
            let current = run.current_makespan;
            run.record(current, Step::Stalled);
            continue;
        };
        let mut ties: Vec<Candidate> = admissible
            .into_iter()
            .filter(|c| c.makespan == min)
            .collect();
        let pick = run.rng.gen_range(0..ties.len());
        let chosen = ties.swap_remove(pick);
        tabu.forbid(chosen.attribute.clone(), iteration, &mut run.rng);
        run.adopt(chosen);
        run.record(min, Step::Accepted);
    }
    Ok(run.finish())
}

/// Samples one neighbor per iteration and accepts it by the Metropolis rule;
/// the temperature is multiplied by the cooling ratio after every
/// `samples_per_temperature` samples.
pub fn simulated_annealing(
    instance: &Instance,
    config: &MetaConfig,
) -> Result<RunReport, ConfigError> {
    let mut run = Run::start(instance, config)?;
    let mut temperature = config.initial_temperature;
    for iteration in 1..=config.iterations {
        match run.random_neighbor() {
            None => {
                let current = run.current_makespan;
                run.record(current, Step::Stalled);
            }
            Some(candidate) => {
                let makespan = candidate.makespan;
                let delta = f64::from(makespan) - f64::from(run.current_makespan);
                if accept_worsening(delta, temperature, &mut run.rng) {
                    run.adopt(candidate);
                    run.record(makespan, Step::Accepted);
                } else {
                    run.record(makespan, Step::Rejected);
                }
            }
        }
        if iteration % config.samples_per_temperature == 0 {
            temperature *= config.cooling_ratio;
        }
    }
    Ok(run.finish())
}

/// Moves to a uniformly chosen strictly improving neighbor. With the swap
/// neighborhood the search stops at a local optimum and the remaining trace
/// rows stay flat; the sampled remove-and-reinsert neighborhood just tries
/// again next iteration.
pub fn hill_climbing(instance: &Instance, config: &MetaConfig) -> Result<RunReport, ConfigError> {
    let mut run = Run::start(instance, config)?;
    let mut stopped = false;
    for _ in 0..config.iterations {
        if stopped {
            let current = run.current_makespan;
            run.record(current, Step::Stalled);
            continue;
        }
        let current = run.current_makespan;
        let mut improving: Vec<Candidate> = run
            .neighbors()
            .into_iter()
            .filter(|c| c.makespan < current)
            .collect();
        if improving.is_empty() {
            stopped = config.neighborhood == Neighborhood::MultiMove;
            run.record(current, Step::Stalled);
            continue;
        }
        let pick = run.rng.gen_range(0..improving.len());
        let chosen = improving.swap_remove(pick);
        let makespan = chosen.makespan;
        run.adopt(chosen);
        run.record(makespan, Step::Accepted);
    }
    Ok(run.finish())
}
