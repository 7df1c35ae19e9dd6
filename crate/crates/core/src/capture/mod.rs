//! Capture records, capture logs and the per-target argument union.

mod union;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ScalarKind, Tuple};

pub use union::{build_union, coverage_gain, CaptureUnion, CoverageGain, Provenance, UnionFile};

/// Execution session a record was captured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Context {
    Test,
    Field,
}

impl Context {
    pub fn as_str(self) -> &'static str {
        match self {
            Context::Test => "test",
            Context::Field => "field",
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Context {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test" => Ok(Context::Test),
            "field" => Ok(Context::Field),
            other => Err(Error::Config(format!("unknown capture mode `{other}`"))),
        }
    }
}

/// One runtime invocation of a target. Field order is the log's key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureRecord {
    #[serde(rename = "t")]
    pub target: String,
    #[serde(rename = "a")]
    pub tuple: Tuple,
    #[serde(rename = "c")]
    pub context: Context,
    #[serde(rename = "id")]
    pub test_id: Option<String>,
    #[serde(rename = "n")]
    pub seq: u64,
}

impl CaptureRecord {
    /// The record as one log line, without the terminator.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

/// Parameter kinds per target id, as listed in `targets.json`.
pub type KindTable = BTreeMap<String, Vec<ScalarKind>>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadedLog {
    pub records: Vec<CaptureRecord>,
    pub warnings: Vec<String>,
    /// One diagnostic per rejected line.
    pub rejected: Vec<String>,
}

/// Reads a capture log. A final line without its terminator that does not
/// parse is treated as a crash artifact and skipped with a warning.
pub fn load(path: &Path, kinds: &KindTable) -> Result<LoadedLog> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_log(&text, kinds, &path.display().to_string()))
}

pub fn parse_log(text: &str, kinds: &KindTable, label: &str) -> LoadedLog {
    let mut out = LoadedLog::default();
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: CaptureRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                if i + 1 == lines.len() && !complete {
                    out.warnings
                        .push(format!("{label}:{lineno}: skipped truncated final record"));
                } else {
                    out.rejected.push(format!("{label}:{lineno}: malformed record: {e}"));
                }
                continue;
            }
        };
        let Some(expected) = kinds.get(&record.target) else {
            out.rejected
                .push(format!("{label}:{lineno}: unknown target `{}`", record.target));
            continue;
        };
        if let Err(e) = record.tuple.check_kinds(expected) {
            out.rejected
                .push(format!("{label}:{lineno}: {} for `{}`", e, record.target));
            continue;
        }
        out.records.push(record);
    }
    out
}
