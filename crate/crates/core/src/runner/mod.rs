//! Execution of generated PUTs, classification, finalization and reports.

pub mod classify;
pub mod finalize;
pub mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::cargo::{self, Exit, TestStatus};
use crate::error::{Error, Result};
use crate::generate::{ExcludedPut, GeneratedUnit};

pub use classify::{classify, Category, Classification};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// Harness or infrastructure fault, as opposed to a failed assertion.
    Error,
    Timeout,
}

/// Line of `verdicts.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub put: String,
    pub row: usize,
    #[serde(rename = "o")]
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub timeout: Duration,
    pub retries: u32,
    pub jobs: usize,
    pub parallel_rows: bool,
    /// Extra environment for every cell.
    pub env: Vec<(String, String)>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            timeout: DEFAULT_TIMEOUT,
            retries: 0,
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            parallel_rows: false,
            env: Vec::new(),
        }
    }
}

/// A compiled test target and the row tests of each of its PUTs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunUnit {
    pub name: String,
    /// `(put id, libtest name per row)`.
    pub puts: Vec<(String, Vec<String>)>,
}

impl From<&GeneratedUnit> for RunUnit {
    fn from(unit: &GeneratedUnit) -> Self {
        RunUnit {
            name: unit.name.clone(),
            puts: unit
                .puts
                .iter()
                .map(|p| (p.id.clone(), unit.row_tests.get(&p.id).cloned().unwrap_or_default()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Execution {
    pub verdicts: Vec<Verdict>,
    /// PUTs whose unit failed to compile.
    pub excluded: Vec<ExcludedPut>,
}

struct Cell {
    put: String,
    row: usize,
    binary: PathBuf,
    test: String,
}

fn run_cell(cell: &Cell, options: &RunOptions) -> Result<Outcome> {
    let scratch = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let cwd = scratch.path().join("cwd");
    std::fs::create_dir(&cwd).map_err(|e| Error::io(&cwd, e))?;
    let stdout = scratch.path().join("stdout");
    let mut cmd = cargo::command(cell.binary.to_str().unwrap_or_default(), &cwd);
    cmd.args([cell.test.as_str(), "--exact", "--test-threads=1"])
        .envs(options.env.iter().map(|(k, v)| (k, v)));
    let exit = cargo::run_bounded(cmd, options.timeout, &stdout, &scratch.path().join("stderr"))?;
    if exit == Exit::TimedOut {
        return Ok(Outcome::Timeout);
    }
    let text = std::fs::read_to_string(&stdout).unwrap_or_default();
    let status = cargo::parse_libtest(&text)
        .into_iter()
        .find(|(name, _)| *name == cell.test)
        .map(|(_, s)| s);
    Ok(match status {
        Some(TestStatus::Ok) => Outcome::Pass,
        Some(TestStatus::Failed) => Outcome::Fail,
        Some(TestStatus::Ignored) | None => Outcome::Error,
    })
}

fn run_with_retries(cell: &Cell, options: &RunOptions) -> Result<Outcome> {
    let mut outcome = run_cell(cell, options)?;
    for _ in 0..options.retries {
        if outcome == Outcome::Pass {
            break;
        }
        outcome = run_cell(cell, options)?;
    }
    Ok(outcome)
}

/// Builds each unit of `project` and runs every row test of every PUT in a
/// fresh working directory. Rows of one PUT run in order unless
/// `parallel_rows` is set; different PUTs run in parallel.
pub fn execute(project: &Path, units: &[RunUnit], options: &RunOptions) -> Result<Execution> {
    let mut execution = Execution::default();
    let mut jobs: Vec<Vec<Cell>> = Vec::new();
    for unit in units {
        let binary = match cargo::build_tests(project, Some(&unit.name), &format!("generated unit {}", unit.name)) {
            Ok(mut binaries) if !binaries.is_empty() => binaries.remove(0).path,
            Ok(_) => {
                exclude_unit(&mut execution, unit, "no test executable was produced".to_owned());
                continue;
            }
            Err(Error::Build { log, .. }) => {
                let tail: Vec<&str> = log.lines().filter(|l| l.starts_with("error")).take(5).collect();
                exclude_unit(&mut execution, unit, format!("unit {} failed to compile: {}", unit.name, tail.join(" | ")));
                continue;
            }
            Err(e) => return Err(e),
        };
        for (put, rows) in &unit.puts {
            let cells: Vec<Cell> = rows
                .iter()
                .enumerate()
                .map(|(row, test)| Cell {
                    put: put.clone(),
                    row,
                    binary: binary.clone(),
                    test: test.clone(),
                })
                .collect();
            if options.parallel_rows {
                jobs.extend(cells.into_iter().map(|c| vec![c]));
            } else {
                jobs.push(cells);
            }
        }
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Result<Verdict>>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..options.jobs.max(1).min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                for cell in job {
                    let verdict = run_with_retries(cell, options).map(|outcome| Verdict {
                        put: cell.put.clone(),
                        row: cell.row,
                        outcome,
                    });
                    results.lock().expect("no poisoned results").push(verdict);
                }
            });
        }
    });
    let mut verdicts = results.into_inner().expect("no poisoned results").into_iter().collect::<Result<Vec<_>>>()?;
    let order: BTreeMap<&str, usize> = units
        .iter()
        .flat_map(|u| u.puts.iter().map(|(p, _)| p.as_str()))
        .enumerate()
        .map(|(i, p)| (p, i))
        .collect();
    verdicts.sort_by_key(|v| (order.get(v.put.as_str()).copied(), v.row));
    execution.verdicts = verdicts;
    Ok(execution)
}

fn exclude_unit(execution: &mut Execution, unit: &RunUnit, reason: String) {
    for (put, _) in &unit.puts {
        execution.excluded.push(ExcludedPut {
            put: put.clone(),
            reason: reason.clone(),
        });
    }
}

pub fn verdicts_jsonl(verdicts: &[Verdict]) -> String {
    verdicts
        .iter()
        .map(|v| serde_json::to_string(v).expect("verdicts serialize") + "\n")
        .collect()
}

pub fn parse_verdicts(text: &str) -> Result<Vec<Verdict>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::json("verdicts.jsonl", e)))
        .collect()
}
