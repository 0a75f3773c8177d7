//! Benchmark harness: runs configured algorithms over PSPLIB instances and
//! seeds, validates every best schedule and writes results and traces.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use rcpsp_core::{
    default_removal_count, rar_search, read_psplib, run_metaheuristic, serial_sgs,
    validate_schedule, ConfigError, Driver, Instance, MetaConfig, Neighborhood, RunReport,
    SearchConfig, Time, DEFAULT_ITERATIONS, DEFAULT_STAGNATION,
};

pub const RESULTS_HEADER: [&str; 9] = [
    "instance",
    "algorithm",
    "best",
    "best_known",
    "dev_pct",
    "iterations",
    "decodes",
    "seconds",
    "seed",
];

pub const TRACE_HEADER: &str = "iteration,current_cost,best_cost";

/// One algorithm row of the result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Remove-and-reinsert; `m` overrides the run-wide removal count.
    Rar {
        m: Option<usize>,
    },
    Meta(Driver, Neighborhood),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown algorithm `{0}` (expected rar, rar:N, tabu-mm, tabu-rar, sa-mm, sa-rar, hc-mm or hc-rar)")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use Driver::*;
        use Neighborhood::*;
        let unknown = || UnknownAlgorithm(s.to_string());
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "rar" => Algorithm::Rar { m: None },
            "tabu-mm" => Algorithm::Meta(Tabu, MultiMove),
            "tabu-rar" => Algorithm::Meta(Tabu, RemoveReinsert),
            "sa-mm" => Algorithm::Meta(Annealing, MultiMove),
            "sa-rar" => Algorithm::Meta(Annealing, RemoveReinsert),
            "hc-mm" => Algorithm::Meta(HillClimbing, MultiMove),
            "hc-rar" => Algorithm::Meta(HillClimbing, RemoveReinsert),
            other => {
                let m = other
                    .strip_prefix("rar:")
                    .and_then(|m| m.parse().ok())
                    .filter(|&m| m > 0)
                    .ok_or_else(unknown)?;
                Algorithm::Rar { m: Some(m) }
            }
        })
    }
}

impl Algorithm {
    /// Every metaheuristic row followed by remove-and-reinsert with 5 and
    /// 10 activities.
    pub const LINEUP: [Algorithm; 8] = [
        Algorithm::Meta(Driver::Tabu, Neighborhood::MultiMove),
        Algorithm::Meta(Driver::Tabu, Neighborhood::RemoveReinsert),
        Algorithm::Meta(Driver::Annealing, Neighborhood::MultiMove),
        Algorithm::Meta(Driver::Annealing, Neighborhood::RemoveReinsert),
        Algorithm::Meta(Driver::HillClimbing, Neighborhood::MultiMove),
        Algorithm::Meta(Driver::HillClimbing, Neighborhood::RemoveReinsert),
        Algorithm::Rar { m: Some(5) },
        Algorithm::Rar { m: Some(10) },
    ];

    /// File-name friendly key, the inverse of parsing (`rar:N` becomes `rar-N`).
    pub fn key(&self) -> String {
        match self {
            Algorithm::Rar { m: None } => "rar".into(),
            Algorithm::Rar { m: Some(m) } => format!("rar-{m}"),
            Algorithm::Meta(d, n) => {
                let d = match d {
                    Driver::Tabu => "tabu",
                    Driver::Annealing => "sa",
                    Driver::HillClimbing => "hc",
                };
                let n = match n {
                    Neighborhood::MultiMove => "mm",
                    Neighborhood::RemoveReinsert => "rar",
                };
                format!("{d}-{n}")
            }
        }
    }

    /// Table label; `m` is the removal count actually used.
    pub fn label(&self, m: usize) -> String {
        match self {
            Algorithm::Rar { .. } => format!("Remove and Reinsert with {m} activities"),
            Algorithm::Meta(Driver::Tabu, Neighborhood::MultiMove) => {
                "Tabu search – MultiMove (MM)".into()
            }
            Algorithm::Meta(Driver::Tabu, Neighborhood::RemoveReinsert) => {
                "Tabu search – Remove and reinsert (RAR)".into()
            }
            Algorithm::Meta(Driver::Annealing, Neighborhood::MultiMove) => {
                "Simulated Annealing - MM".into()
            }
            Algorithm::Meta(Driver::Annealing, Neighborhood::RemoveReinsert) => {
                "Simulated Annealing - RAR".into()
            }
            Algorithm::Meta(Driver::HillClimbing, Neighborhood::MultiMove) => {
                "Hill Climbing – MM".into()
            }
            Algorithm::Meta(Driver::HillClimbing, Neighborhood::RemoveReinsert) => {
                "Hill Climbing – RAR".into()
            }
        }
    }
}

/// Parameters shared by every run of a benchmark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub iterations: usize,
    /// Removal count; `None` means `round(n / 10)` per instance.
    pub m: Option<usize>,
    /// Exactly solved seed subset size; `None` means the instance default.
    pub construction_m: Option<usize>,
    pub stagnation: usize,
    /// Cap on decodes for remove-and-reinsert runs.
    pub decode_budget: Option<u64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            m: None,
            construction_m: None,
            stagnation: DEFAULT_STAGNATION,
            decode_budget: None,
        }
    }
}

impl Settings {
    /// Removal count `algorithm` uses on `instance`.
    pub fn removal_count(&self, algorithm: Algorithm, instance: &Instance) -> usize {
        match algorithm {
            Algorithm::Rar { m: Some(m) } => m,
            _ => self.m.unwrap_or_else(|| default_removal_count(instance)),
        }
    }
}

/// Runs one (algorithm, seed) pair on `instance`.
pub fn run_algorithm(
    instance: &Instance,
    algorithm: Algorithm,
    settings: &Settings,
    seed: u64,
) -> Result<RunReport, ConfigError> {
    let m = settings.removal_count(algorithm, instance);
    match algorithm {
        Algorithm::Rar { .. } => {
            let mut config = SearchConfig::for_instance(instance);
            config.m_remove = m;
            config.max_iterations = settings.iterations;
            config.stagnation_threshold = settings.stagnation;
            config.seed = seed;
            config.evaluation_budget = settings.decode_budget;
            if let Some(c) = settings.construction_m {
                config.construction_m = c;
            }
            rar_search(instance, &config)
        }
        Algorithm::Meta(driver, neighborhood) => {
            let mut config = MetaConfig::new(driver, neighborhood, instance);
            config.iterations = settings.iterations;
            config.m_remove = m;
            config.seed = seed;
            if let Some(c) = settings.construction_m {
                config.construction_m = c;
            }
            run_metaheuristic(instance, &config)
        }
    }
}

/// One line of the results file.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub instance: String,
    pub algorithm: String,
    pub best: Time,
    pub best_known: Option<Time>,
    pub iterations: usize,
    pub decodes: u64,
    pub seconds: f64,
    pub seed: u64,
}

impl BenchmarkRow {
    pub fn deviation_percent(&self) -> Option<f64> {
        self.best_known.map(|bk| deviation_percent(self.best, bk))
    }

    fn record(&self) -> [String; 9] {
        [
            self.instance.clone(),
            self.algorithm.clone(),
            self.best.to_string(),
            self.best_known.map(|b| b.to_string()).unwrap_or_default(),
            self.deviation_percent()
                .map(|d| format!("{d:.2}"))
                .unwrap_or_default(),
            self.iterations.to_string(),
            self.decodes.to_string(),
            format!("{:.3}", self.seconds),
            self.seed.to_string(),
        ]
    }
}

/// `100 (found - best_known) / best_known`.
pub fn deviation_percent(found: Time, best_known: Time) -> f64 {
    100.0 * (f64::from(found) - f64::from(best_known)) / f64::from(best_known)
}

/// Writes the header and `rows` as CSV.
pub fn write_rows<W: Write>(rows: &[BenchmarkRow], writer: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(RESULTS_HEADER)?;
    for row in rows {
        out.write_record(row.record())?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum BestKnownError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses "name value" lines. Blank lines and `#` comments are skipped.
pub fn parse_best_known(text: &str) -> Result<BTreeMap<String, Time>, BestKnownError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| BestKnownError::Malformed {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [name, value] = fields[..] else {
            return Err(malformed(format!("expected `name value`, found `{line}`")));
        };
        let value: Time = value
            .parse()
            .map_err(|_| malformed(format!("`{value}` is not a non-negative integer")))?;
        if map.insert(name.to_string(), value).is_some() {
            return Err(malformed(format!("duplicate entry for `{name}`")));
        }
    }
    Ok(map)
}

pub fn load_best_known(path: impl AsRef<Path>) -> Result<BTreeMap<String, Time>, BestKnownError> {
    parse_best_known(&fs::read_to_string(path)?)
}

/// Writes one row per iteration: iteration, current and best makespan.
pub fn write_trace<W: Write>(report: &RunReport, mut writer: W) -> io::Result<()> {
    writeln!(writer, "{TRACE_HEADER}")?;
    for row in &report.trace {
        writeln!(writer, "{},{},{}", row.iteration, row.current, row.best)?;
    }
    writer.flush()
}

pub fn emit_trace(report: &RunReport, path: impl AsRef<Path>) -> io::Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_trace(report, io::BufWriter::new(fs::File::create(path)?))
}

/// Replaces `{instance}`, `{algorithm}` and `{seed}` in `template`.
pub fn fill_template(template: &str, instance: &str, algorithm: Algorithm, seed: u64) -> PathBuf {
    template
        .replace("{instance}", instance)
        .replace("{algorithm}", &algorithm.key())
        .replace("{seed}", &seed.to_string())
        .into()
}

/// Expands each pattern as a glob if it contains glob syntax, otherwise
/// takes it as a path. Matches of one pattern are sorted.
pub fn expand_instances(patterns: &[String]) -> Result<Vec<PathBuf>, glob::PatternError> {
    let mut paths = Vec::new();
    for pattern in patterns {
        if pattern.contains(['*', '?', '[']) {
            let mut matched: Vec<PathBuf> = glob::glob(pattern)?.filter_map(Result::ok).collect();
            matched.sort();
            paths.extend(matched);
        } else {
            paths.push(PathBuf::from(pattern));
        }
    }
    Ok(paths)
}

#[derive(Debug, Clone, Default)]
pub struct Plan {
    pub instances: Vec<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub settings: Settings,
    pub best_known: BTreeMap<String, Time>,
    /// Results CSV; not written when `None`.
    pub out: Option<PathBuf>,
    /// Trace path template.
    pub trace: Option<String>,
    /// Best-schedule path template.
    pub schedule: Option<String>,
}

/// A run that could not produce a validated row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub instance: String,
    pub algorithm: String,
    pub seed: u64,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} / {} / seed {}: {}",
            self.instance, self.algorithm, self.seed, self.message
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Sorted by instance, algorithm (plan order) and seed.
    pub rows: Vec<BenchmarkRow>,
    pub failures: Vec<Failure>,
}

impl Outcome {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Job<'a> {
    instance: &'a Instance,
    instance_index: usize,
    algorithm_index: usize,
    algorithm: Algorithm,
    seed: u64,
}

/// Runs every (instance, algorithm, seed) triple of `plan` in parallel and
/// validates each best schedule. The results file is written once, after
/// all runs, even if some failed.
pub fn run_benchmark(plan: &Plan) -> Outcome {
    let mut outcome = Outcome::default();
    let mut loaded = Vec::new();
    for (index, path) in plan.instances.iter().enumerate() {
        match read_psplib(path) {
            Ok(instance) => loaded.push((index, instance)),
            Err(e) => {
                for &algorithm in &plan.algorithms {
                    for &seed in &plan.seeds {
                        outcome.failures.push(Failure {
                            instance: path.display().to_string(),
                            algorithm: algorithm.key(),
                            seed,
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
    }

    let mut jobs = Vec::new();
    for (instance_index, instance) in &loaded {
        for (algorithm_index, &algorithm) in plan.algorithms.iter().enumerate() {
            for &seed in &plan.seeds {
                jobs.push(Job {
                    instance,
                    instance_index: *instance_index,
                    algorithm_index,
                    algorithm,
                    seed,
                });
            }
        }
    }

    let mut results: Vec<_> = jobs
        .par_iter()
        .map(|job| {
            (
                (
                    job.instance.name(),
                    job.instance_index,
                    job.algorithm_index,
                    job.seed,
                ),
                run_job(plan, job),
            )
        })
        .collect();
    results.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, result) in results {
        match result {
            Ok(row) => outcome.rows.push(row),
            Err(failure) => outcome.failures.push(failure),
        }
    }

    if let Some(path) = &plan.out {
        let written = fs::File::create(path)
            .map_err(csv::Error::from)
            .and_then(|f| write_rows(&outcome.rows, io::BufWriter::new(f)));
        if let Err(e) = written {
            outcome.failures.push(Failure {
                instance: "-".into(),
                algorithm: "-".into(),
                seed: 0,
                message: format!("writing {}: {e}", path.display()),
            });
        }
    }
    outcome
}

fn run_job(plan: &Plan, job: &Job<'_>) -> Result<BenchmarkRow, Failure> {
    let instance = job.instance;
    let fail = |message: String| Failure {
        instance: instance.name().to_string(),
        algorithm: job.algorithm.key(),
        seed: job.seed,
        message,
    };
    let started = Instant::now();
    let report = run_algorithm(instance, job.algorithm, &plan.settings, job.seed)
        .map_err(|e| fail(e.to_string()))?;
    let seconds = started.elapsed().as_secs_f64();

    let schedule =
        serial_sgs(&report.best_list, instance).map_err(|e| fail(format!("best list: {e}")))?;
    let violations = validate_schedule(instance, &schedule);
    if !violations.is_empty() {
        let listed: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(fail(format!(
            "best schedule is infeasible: {}",
            listed.join("; ")
        )));
    }
    if schedule.makespan() != report.best_makespan {
        return Err(fail(format!(
            "reported makespan {} but the best list decodes to {}",
            report.best_makespan,
            schedule.makespan()
        )));
    }

    if let Some(template) = &plan.trace {
        let path = fill_template(template, instance.name(), job.algorithm, job.seed);
        emit_trace(&report, &path).map_err(|e| fail(format!("writing {}: {e}", path.display())))?;
    }
    if let Some(template) = &plan.schedule {
        let path = fill_template(template, instance.name(), job.algorithm, job.seed);
        let written = path
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .map_or(Ok(()), fs::create_dir_all)
            .and_then(|_| fs::write(&path, schedule.to_text()));
        written.map_err(|e| fail(format!("writing {}: {e}", path.display())))?;
    }

    let m = plan.settings.removal_count(job.algorithm, instance);
    Ok(BenchmarkRow {
        instance: instance.name().to_string(),
        algorithm: job.algorithm.label(m),
        best: report.best_makespan,
        best_known: plan.best_known.get(instance.name()).copied(),
        iterations: report.iterations(),
        decodes: report.evaluations,
        seconds,
        seed: job.seed,
    })
}

/// Aggregate of the rows sharing an instance and algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub instance: String,
    pub algorithm: String,
    pub runs: usize,
    pub min: Time,
    pub mean: f64,
    pub best_known: Option<Time>,
}

/// Groups consecutive rows by (instance, algorithm).
pub fn summarize(rows: &[BenchmarkRow]) -> Vec<Summary> {
    let mut out: Vec<Summary> = Vec::new();
    let mut sums: Vec<u64> = Vec::new();
    for row in rows {
        match out.last_mut() {
            Some(s) if s.instance == row.instance && s.algorithm == row.algorithm => {
                s.runs += 1;
                s.min = s.min.min(row.best);
                *sums.last_mut().unwrap() += u64::from(row.best);
            }
            _ => {
                out.push(Summary {
                    instance: row.instance.clone(),
                    algorithm: row.algorithm.clone(),
                    runs: 1,
                    min: row.best,
                    mean: 0.0,
                    best_known: row.best_known,
                });
                sums.push(u64::from(row.best));
            }
        }
    }
    for (s, sum) in out.iter_mut().zip(sums) {
        s.mean = sum as f64 / s.runs as f64;
    }
    out
}
