//! Reader and writer for PSPLIB single-mode (`.sm`) files.
//!
//! Only the fields needed for the RCPSP are interpreted: the job count, the
//! horizon, the renewable resource count and the three data sections. Other
//! header lines (base data file, random seed, project information) are skipped.

use std::fmt::{self, Write as _};
use std::path::Path;

use thiserror::Error;

use crate::closure::topological_order;
use crate::instance::{Instance, InstanceError, Time};

const PRECEDENCE: &str = "PRECEDENCE RELATIONS:";
const REQUESTS: &str = "REQUESTS/DURATIONS:";
const AVAILABILITIES: &str = "RESOURCEAVAILABILITIES:";

/// Part of the file an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Header,
    Precedence,
    Requests,
    Availabilities,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::Header => "header",
            Section::Precedence => PRECEDENCE,
            Section::Requests => REQUESTS,
            Section::Availabilities => AVAILABILITIES,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{section}{}: {message}", .line.map(|l| format!(" (line {l})")).unwrap_or_default())]
pub struct ParseError {
    pub section: Section,
    /// 1-based line number, when the problem is tied to one line.
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    fn at(section: Section, line: usize, message: impl Into<String>) -> Self {
        Self {
            section,
            line: Some(line),
            message: message.into(),
        }
    }

    fn in_section(section: Section, message: impl Into<String>) -> Self {
        Self {
            section,
            line: None,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
}

/// Reads a `.sm` file; the instance is named after the file stem.
pub fn read_psplib(path: impl AsRef<Path>) -> Result<Instance, LoadError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: display.clone(),
        source,
    })?;
    let mut instance = parse_psplib(&text).map_err(|source| LoadError::Parse {
        path: display,
        source,
    })?;
    if let Some(stem) = path.file_stem() {
        instance.set_name(stem.to_string_lossy());
    }
    Ok(instance)
}

struct Row {
    line: usize,
    values: Vec<u64>,
}

/// Integer tokens of a data row, or `None` for header/separator lines.
fn data_row(line: &str) -> Option<Result<Vec<u64>, String>> {
    let first = line.split_whitespace().next()?;
    if !first.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(
        line.split_whitespace()
            .map(|tok| {
                tok.parse::<u64>()
                    .map_err(|_| format!("expected an integer, found `{tok}`"))
            })
            .collect(),
    )
}

/// First integer after the colon of a `key : value` header line.
fn header_value(line: &str) -> Option<u64> {
    let (_, rest) = line.split_once(':')?;
    rest.split_whitespace().next()?.parse().ok()
}

fn to_u32(value: u64, section: Section, line: usize) -> Result<u32, ParseError> {
    u32::try_from(value)
        .map_err(|_| ParseError::at(section, line, format!("value {value} is too large")))
}

/// Parses the contents of a PSPLIB single-mode file.
pub fn parse_psplib(text: &str) -> Result<Instance, ParseError> {
    let mut jobs: Option<usize> = None;
    let mut horizon: Option<u64> = None;
    let mut renewable: Option<usize> = None;
    let mut section = Section::Header;
    let mut seen = [false; 3];
    let mut precedence: Vec<Row> = Vec::new();
    let mut requests: Vec<Row> = Vec::new();
    let mut availabilities: Vec<Row> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with(PRECEDENCE) {
            section = Section::Precedence;
            seen[0] = true;
            continue;
        }
        if line.starts_with(REQUESTS) {
            section = Section::Requests;
            seen[1] = true;
            continue;
        }
        if line.starts_with(AVAILABILITIES) {
            section = Section::Availabilities;
            seen[2] = true;
            continue;
        }
        if line.starts_with('*') {
            section = Section::Header;
            continue;
        }
        match section {
            Section::Header => {
                let lower = line.to_ascii_lowercase();
                let parse = |what: &str| {
                    header_value(line).ok_or_else(|| {
                        ParseError::at(Section::Header, lineno, format!("malformed {what} line"))
                    })
                };
                if lower.starts_with("jobs") {
                    jobs = Some(parse("jobs")? as usize);
                } else if lower.starts_with("horizon") {
                    horizon = Some(parse("horizon")?);
                } else if lower.starts_with("- renewable") {
                    renewable = Some(parse("renewable resources")? as usize);
                } else if (lower.starts_with("- nonrenewable") || lower.starts_with("- doubly"))
                    && parse("resource")? != 0
                {
                    return Err(ParseError::at(
                        Section::Header,
                        lineno,
                        "only renewable resources are supported",
                    ));
                }
            }
            Section::Precedence | Section::Requests | Section::Availabilities => {
                let Some(values) = data_row(line) else {
                    continue;
                };
                let values = values.map_err(|m| ParseError::at(section, lineno, m))?;
                let rows = match section {
                    Section::Precedence => &mut precedence,
                    Section::Requests => &mut requests,
                    _ => &mut availabilities,
                };
                rows.push(Row {
                    line: lineno,
                    values,
                });
            }
        }
    }

    let jobs = jobs.ok_or_else(|| {
        ParseError::in_section(
            Section::Header,
            "missing `jobs (incl. supersource/sink )` line",
        )
    })?;
    let horizon =
        horizon.ok_or_else(|| ParseError::in_section(Section::Header, "missing `horizon` line"))?;
    let resources = renewable
        .ok_or_else(|| ParseError::in_section(Section::Header, "missing `- renewable` line"))?;
    for (present, section) in seen.iter().zip([
        Section::Precedence,
        Section::Requests,
        Section::Availabilities,
    ]) {
        if !present {
            return Err(ParseError::in_section(section, "section header not found"));
        }
    }
    if jobs < 2 {
        return Err(ParseError::in_section(
            Section::Header,
            format!("job count {jobs} does not include the two dummy activities"),
        ));
    }

    // PRECEDENCE RELATIONS: jobnr #modes #successors successors...
    check_row_count(Section::Precedence, &precedence, jobs)?;
    let mut successors = Vec::with_capacity(jobs);
    for (i, row) in precedence.iter().enumerate() {
        let v = &row.values;
        if v.len() < 3 {
            return Err(ParseError::at(
                Section::Precedence,
                row.line,
                "expected jobnr, #modes and #successors",
            ));
        }
        check_job_number(Section::Precedence, row, i)?;
        if v[1] != 1 {
            return Err(ParseError::at(
                Section::Precedence,
                row.line,
                format!(
                    "job has {} modes, only single-mode files are supported",
                    v[1]
                ),
            ));
        }
        let listed = &v[3..];
        if listed.len() as u64 != v[2] {
            return Err(ParseError::at(
                Section::Precedence,
                row.line,
                format!("declares {} successors but lists {}", v[2], listed.len()),
            ));
        }
        let mut succ = Vec::with_capacity(listed.len());
        for &s in listed {
            if s == 0 || s as usize > jobs {
                return Err(ParseError::at(
                    Section::Precedence,
                    row.line,
                    format!("successor {s} is not a job"),
                ));
            }
            succ.push(s as usize - 1);
        }
        successors.push(succ);
    }
    if let Err(cycle) = topological_order(&successors) {
        let row = &precedence[cycle.activity - 1];
        return Err(ParseError::at(
            Section::Precedence,
            row.line,
            cycle.to_string(),
        ));
    }

    // REQUESTS/DURATIONS: jobnr mode duration demands...
    check_row_count(Section::Requests, &requests, jobs)?;
    let mut durations = Vec::with_capacity(jobs);
    let mut demands = Vec::with_capacity(jobs);
    for (i, row) in requests.iter().enumerate() {
        let v = &row.values;
        if v.len() != 3 + resources {
            return Err(ParseError::at(
                Section::Requests,
                row.line,
                format!("expected {} columns, found {}", 3 + resources, v.len()),
            ));
        }
        check_job_number(Section::Requests, row, i)?;
        durations.push(to_u32(v[2], Section::Requests, row.line)?);
        demands.push(
            v[3..]
                .iter()
                .map(|&d| to_u32(d, Section::Requests, row.line))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }

    // RESOURCEAVAILABILITIES: one row of capacities.
    let capacities: Vec<u32> = match availabilities.as_slice() {
        [row] if row.values.len() == resources => row
            .values
            .iter()
            .map(|&c| to_u32(c, Section::Availabilities, row.line))
            .collect::<Result<_, _>>()?,
        [row] => {
            return Err(ParseError::at(
                Section::Availabilities,
                row.line,
                format!(
                    "expected {resources} capacities, found {}",
                    row.values.len()
                ),
            ))
        }
        [] if resources == 0 => Vec::new(),
        rows => {
            return Err(ParseError::in_section(
                Section::Availabilities,
                format!("expected one row of capacities, found {}", rows.len()),
            ))
        }
    };
    for (i, row) in requests.iter().enumerate() {
        for (k, (&d, &cap)) in demands[i].iter().zip(&capacities).enumerate() {
            if d > cap {
                return Err(ParseError::at(
                    Section::Requests,
                    row.line,
                    format!(
                        "job {} requests {d} units of R {}, capacity is {cap}",
                        i + 1,
                        k + 1
                    ),
                ));
            }
        }
    }

    let horizon = Time::try_from(horizon).map_err(|_| {
        ParseError::in_section(Section::Header, format!("horizon {horizon} is too large"))
    })?;
    Instance::new("", durations, demands, capacities, successors, horizon).map_err(|e| {
        let section = match e {
            InstanceError::ZeroCapacity { .. } => Section::Availabilities,
            InstanceError::DummyNotEmpty(_) => Section::Requests,
            _ => Section::Precedence,
        };
        ParseError::in_section(section, e.to_string())
    })
}

fn check_row_count(section: Section, rows: &[Row], jobs: usize) -> Result<(), ParseError> {
    if rows.len() != jobs {
        return Err(ParseError::in_section(
            section,
            format!(
                "header declares {jobs} jobs but the section has {} rows",
                rows.len()
            ),
        ));
    }
    Ok(())
}

fn check_job_number(section: Section, row: &Row, index: usize) -> Result<(), ParseError> {
    if row.values[0] != index as u64 + 1 {
        return Err(ParseError::at(
            section,
            row.line,
            format!("expected job {}, found job {}", index + 1, row.values[0]),
        ));
    }
    Ok(())
}

/// Serializes an instance in the PSPLIB single-mode layout.
pub fn write_psplib(instance: &Instance) -> String {
    let n = instance.activity_count();
    let r = instance.resource_count();
    let stars = "*".repeat(72);
    let mut out = String::new();
    // Writing into a String cannot fail.
    let _ = (|| -> fmt::Result {
        writeln!(out, "{stars}")?;
        writeln!(out, "file with basedata            : {}", instance.name())?;
        writeln!(out, "{stars}")?;
        writeln!(out, "projects                      :  1")?;
        writeln!(out, "jobs (incl. supersource/sink ):  {n}")?;
        writeln!(
            out,
            "horizon                       :  {}",
            instance.horizon()
        )?;
        writeln!(out, "RESOURCES")?;
        writeln!(out, "  - renewable                 :  {r}   R")?;
        writeln!(out, "  - nonrenewable              :  0   N")?;
        writeln!(out, "  - doubly constrained        :  0   D")?;
        writeln!(out, "{stars}")?;
        writeln!(out, "{PRECEDENCE}")?;
        writeln!(out, "jobnr.    #modes  #successors   successors")?;
        for i in 0..n {
            let succ = instance.successors(i);
            write!(out, "{:>4}        1{:>11}      ", i + 1, succ.len())?;
            for &s in succ {
                write!(out, "{:>4}", s + 1)?;
            }
            writeln!(out)?;
        }
        writeln!(out, "{stars}")?;
        writeln!(out, "{REQUESTS}")?;
        write!(out, "jobnr. mode duration")?;
        for k in 0..r {
            write!(out, "  R {}", k + 1)?;
        }
        writeln!(out)?;
        writeln!(out, "{}", "-".repeat(72))?;
        for i in 0..n {
            write!(out, "{:>3}{:>7}{:>6}", i + 1, 1, instance.duration(i))?;
            for &d in instance.demands(i) {
                write!(out, "{d:>5}")?;
            }
            writeln!(out)?;
        }
        writeln!(out, "{stars}")?;
        writeln!(out, "{AVAILABILITIES}")?;
        for k in 0..r {
            write!(out, "  R {}", k + 1)?;
        }
        writeln!(out)?;
        for &c in instance.capacities() {
            write!(out, "{c:>5}")?;
        }
        writeln!(out)?;
        writeln!(out, "{stars}")
    })();
    out
}
