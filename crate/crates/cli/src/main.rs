use std::collections::BTreeMap;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use rcpsp_cli::{
    expand_instances, load_best_known, run_benchmark, summarize, write_rows, Algorithm, Plan,
    Settings,
};
use rcpsp_core::{DEFAULT_ITERATIONS, DEFAULT_STAGNATION};

/// Run RCPSP search algorithms over PSPLIB instances and seeds.
#[derive(Debug, Parser)]
#[command(name = "rcpsp-bench", version)]
struct Args {
    /// Instance file or glob; repeatable.
    #[arg(long = "instance", value_name = "PATH|GLOB")]
    instances: Vec<String>,

    /// rar, rar:N (N activities removed), tabu-mm, tabu-rar, sa-mm, sa-rar,
    /// hc-mm, hc-rar or `lineup` for all table rows; repeatable.
    #[arg(long = "algorithm", value_name = "NAME", default_value = "rar")]
    algorithms: Vec<String>,

    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,

    /// Activities removed per remove-and-reinsert move [default: round(n/10)].
    #[arg(long)]
    m: Option<usize>,

    /// Size of the exactly solved seed subset of the construction.
    #[arg(long)]
    construction_m: Option<usize>,

    /// Non-improving iterations before remove-and-reinsert takes a candidate anyway.
    #[arg(long, default_value_t = DEFAULT_STAGNATION)]
    stagnation: usize,

    /// Stop remove-and-reinsert runs after this many decodes.
    #[arg(long)]
    decode_budget: Option<u64>,

    /// RNG seed; repeatable [default: 1 2 3 4 5].
    #[arg(long = "seed")]
    seeds: Vec<u64>,

    /// Two-column "name value" file of best-known makespans.
    #[arg(long)]
    best_known: Option<PathBuf>,

    /// Results CSV [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,

    /// Trace path template with {instance}, {algorithm} and {seed}.
    #[arg(long)]
    trace: Option<String>,

    /// Best-schedule path template with {instance}, {algorithm} and {seed}.
    #[arg(long)]
    schedule: Option<String>,
}

fn plan(args: Args) -> anyhow::Result<Plan> {
    let mut algorithms = Vec::new();
    for name in &args.algorithms {
        if name == "lineup" {
            algorithms.extend(Algorithm::LINEUP);
        } else {
            algorithms.push(name.parse::<Algorithm>()?);
        }
    }
    let best_known = match &args.best_known {
        Some(path) => {
            load_best_known(path).with_context(|| format!("reading {}", path.display()))?
        }
        None => BTreeMap::new(),
    };
    Ok(Plan {
        instances: expand_instances(&args.instances)?,
        algorithms,
        seeds: if args.seeds.is_empty() {
            (1..=5).collect()
        } else {
            args.seeds
        },
        settings: Settings {
            iterations: args.iterations,
            m: args.m,
            construction_m: args.construction_m,
            stagnation: args.stagnation,
            decode_budget: args.decode_budget,
        },
        best_known,
        out: args.out,
        trace: args.trace,
        schedule: args.schedule,
    })
}

fn main() -> ExitCode {
    let plan = match plan(Args::parse()) {
        Ok(plan) => plan,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if plan.instances.is_empty() {
        eprintln!("warning: no instances matched");
    }
    let outcome = run_benchmark(&plan);
    if plan.out.is_none() {
        if let Err(e) = write_rows(&outcome.rows, io::stdout().lock()) {
            eprintln!("error: writing results: {e}");
            return ExitCode::FAILURE;
        }
    }

    eprintln!(
        "{:<12} {:<42} {:>4} {:>6} {:>8} {:>5} {:>7}",
        "instance", "algorithm", "runs", "min", "mean", "known", "dev%"
    );
    for s in summarize(&outcome.rows) {
        let known = s.best_known.map(|b| b.to_string()).unwrap_or_default();
        let dev = s
            .best_known
            .map(|b| format!("{:.2}", rcpsp_cli::deviation_percent(s.min, b)))
            .unwrap_or_default();
        eprintln!(
            "{:<12} {:<42} {:>4} {:>6} {:>8.2} {:>5} {:>7}",
            s.instance, s.algorithm, s.runs, s.min, s.mean, known, dev
        );
    }
    for failure in &outcome.failures {
        eprintln!("FAILED {failure}");
    }
    if outcome.success() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
