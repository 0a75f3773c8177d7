//! Independent reference implementations used as test oracles. Nothing here
//! calls into the solver except `Instance::new` and its plain accessors.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rcpsp_core::{Instance, Time};

/// Random project with `real` non-dummy activities, 1 to 3 resources and an
/// edge between each ordered pair of real activities with probability
/// `density`. Activities without predecessors hang off the source, those
/// without successors feed the sink.
pub fn random_instance<R: Rng>(rng: &mut R, real: usize, density: f64) -> Instance {
    let n = real + 2;
    let sink = n - 1;
    let resources = rng.gen_range(1..=3);
    let capacities: Vec<u32> = (0..resources).map(|_| rng.gen_range(1..=4)).collect();
    let mut successors = vec![Vec::new(); n];
    let mut has_pred = vec![false; n];
    for i in 1..=real {
        for j in i + 1..=real {
            if rng.gen_bool(density) {
                successors[i].push(j);
                has_pred[j] = true;
            }
        }
    }
    for i in 1..=real {
        if !has_pred[i] {
            successors[0].push(i);
        }
        if successors[i].is_empty() {
            successors[i].push(sink);
        }
    }
    if real == 0 {
        successors[0].push(sink);
    }
    let mut durations = vec![0];
    durations.extend((0..real).map(|_| rng.gen_range(0..=6)));
    durations.push(0);
    let mut demands = vec![vec![0; resources]];
    for _ in 0..real {
        demands.push(capacities.iter().map(|&c| rng.gen_range(0..=c)).collect());
    }
    demands.push(vec![0; resources]);
    let horizon = durations.iter().sum::<Time>().max(1);
    Instance::new(
        "random", durations, demands, capacities, successors, horizon,
    )
    .unwrap()
}

/// Direct predecessors recomputed from the successor lists.
pub fn direct_predecessors(instance: &Instance) -> Vec<Vec<usize>> {
    let mut preds = vec![Vec::new(); instance.activity_count()];
    for i in 0..instance.activity_count() {
        for &j in instance.successors(i) {
            preds[j].push(i);
        }
    }
    preds
}

/// `reach[i][j]` iff there is a non-empty path from `i` to `j`, by DFS from
/// every node.
pub fn reachability(instance: &Instance) -> Vec<Vec<bool>> {
    let n = instance.activity_count();
    let mut reach = vec![vec![false; n]; n];
    for (start, row) in reach.iter_mut().enumerate() {
        let mut stack: Vec<usize> = instance.successors(start).to_vec();
        while let Some(v) = stack.pop() {
            if !row[v] {
                row[v] = true;
                stack.extend_from_slice(instance.successors(v));
            }
        }
    }
    reach
}

/// Uniformly random choice among ready activities at each step.
pub fn random_topological_list<R: Rng>(instance: &Instance, rng: &mut R) -> Vec<usize> {
    let preds = direct_predecessors(instance);
    let n = instance.activity_count();
    let mut missing: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&a| missing[a] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while !ready.is_empty() {
        let a = ready.swap_remove(rng.gen_range(0..ready.len()));
        order.push(a);
        for &s in instance.successors(a) {
            missing[s] -= 1;
            if missing[s] == 0 {
                ready.push(s);
            }
        }
    }
    order
}

/// Serial SGS replayed over an explicit time-by-resource occupancy grid,
/// trying every start time in steps of one. Returns start times.
pub fn grid_sgs(instance: &Instance, order: &[usize]) -> Vec<Time> {
    let preds = direct_predecessors(instance);
    let r = instance.resource_count();
    let slots = instance.durations().iter().sum::<Time>() as usize + 1;
    let mut grid = vec![vec![0u32; r]; slots];
    let mut start = vec![0; instance.activity_count()];
    let mut finish = vec![0; instance.activity_count()];
    for &a in order {
        let p = instance.duration(a);
        let demand = instance.demands(a);
        let mut t = preds[a].iter().map(|&q| finish[q]).max().unwrap_or(0);
        loop {
            let fits = (t..t + p).all(|s| {
                (0..r).all(|k| grid[s as usize][k] + demand[k] <= instance.capacities()[k])
            });
            if fits {
                break;
            }
            t += 1;
        }
        for s in t..t + p {
            for k in 0..r {
                grid[s as usize][k] += demand[k];
            }
        }
        start[a] = t;
        finish[a] = t + p;
    }
    start
}

pub fn grid_makespan(instance: &Instance, order: &[usize]) -> Time {
    let start = grid_sgs(instance, order);
    (0..instance.activity_count())
        .map(|a| start[a] + instance.duration(a))
        .max()
        .unwrap_or(0)
}

/// Every precedence-feasible permutation of all activities.
pub fn all_feasible_lists(instance: &Instance) -> Vec<Vec<usize>> {
    fn extend(
        instance: &Instance,
        missing: &mut Vec<usize>,
        used: &mut Vec<bool>,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = instance.activity_count();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for a in 0..n {
            if used[a] || missing[a] > 0 {
                continue;
            }
            used[a] = true;
            prefix.push(a);
            for &s in instance.successors(a) {
                missing[s] -= 1;
            }
            extend(instance, missing, used, prefix, out);
            for &s in instance.successors(a) {
                missing[s] += 1;
            }
            prefix.pop();
            used[a] = false;
        }
    }
    let mut missing: Vec<usize> = direct_predecessors(instance).iter().map(Vec::len).collect();
    let mut used = vec![false; instance.activity_count()];
    let mut out = Vec::new();
    extend(instance, &mut missing, &mut used, &mut Vec::new(), &mut out);
    out
}

/// Optimal makespan by decoding every feasible list with the grid oracle.
pub fn exhaustive_optimum(instance: &Instance) -> Time {
    all_feasible_lists(instance)
        .iter()
        .map(|l| grid_makespan(instance, l))
        .min()
        .unwrap()
}

/// Longest duration-weighted source-to-sink path by relaxation in
/// topological order.
pub fn longest_path(instance: &Instance) -> Time {
    let preds = direct_predecessors(instance);
    let order = {
        let mut missing: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..instance.activity_count())
            .filter(|&a| missing[a] == 0)
            .collect();
        let mut order = Vec::new();
        while let Some(a) = queue.pop() {
            order.push(a);
            for &s in instance.successors(a) {
                missing[s] -= 1;
                if missing[s] == 0 {
                    queue.push(s);
                }
            }
        }
        order
    };
    let mut finish = vec![0; instance.activity_count()];
    for &a in &order {
        let start = preds[a].iter().map(|&p| finish[p]).max().unwrap_or(0);
        finish[a] = start + instance.duration(a);
    }
    finish.into_iter().max().unwrap_or(0)
}

/// Path of a file in the bundled PSPLIB sample, or in `PSPLIB_DIR` if set.
pub fn psplib_file(name: &str) -> Option<std::path::PathBuf> {
    let mut dirs = Vec::new();
    if let Ok(dir) = std::env::var("PSPLIB_DIR") {
        dirs.push(std::path::PathBuf::from(dir));
    }
    dirs.push(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/psplib"));
    dirs.into_iter().map(|d| d.join(name)).find(|p| p.is_file())
}
