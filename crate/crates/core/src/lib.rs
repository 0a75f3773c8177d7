//! Resource-constrained project scheduling by randomized best insertion.
//!
//! A project is an [`Instance`]. Solutions are [`ActivityList`]s decoded into
//! [`Schedule`]s by the serial schedule generation scheme. The initial list
//! comes from [`best_insertion_construct`]; [`rar_search`] improves it by
//! repeatedly removing a few activities and reinserting each at a best
//! position. [`meta`] holds tabu search, simulated annealing and hill
//! climbing baselines over swap and remove-and-reinsert neighborhoods.

pub mod closure;
pub mod construction;
pub mod decode;
pub mod instance;
pub mod meta;
pub mod psplib;
pub mod rar;
pub mod report;
pub mod schedule;

pub use closure::{CycleError, PrecedenceClosure};
pub use construction::{
    best_insertion_construct, bnb_exact, default_seed_size, feasible_insert_positions,
    induced_subinstance, insert_best, select_seed_subset, BnbOutcome, ConfigError, InsertionWindow,
    PartialList, SubInstance, WindowError, DEFAULT_NODE_BUDGET,
};
pub use decode::Decoder;
pub use instance::{Instance, InstanceError, Time};
pub use meta::{
    accept_worsening, hill_climbing, run_metaheuristic, simulated_annealing, swap_neighborhood,
    tabu_search, Driver, MetaConfig, Neighborhood, SwapMove, TabuList,
};
pub use psplib::{parse_psplib, read_psplib, write_psplib, LoadError, ParseError, Section};
pub use rar::{
    default_removal_count, rar_iteration, rar_search, reinsert_best, remove_activities, RarMove,
    SearchConfig, DEFAULT_ITERATIONS, DEFAULT_STAGNATION,
};
pub use report::{RunReport, Step, TraceRow};
pub use schedule::{
    is_precedence_feasible_list, serial_sgs, validate_schedule, ActivityList, ListError, Schedule,
    ScheduleError, ScheduleTextError, Violation,
};
