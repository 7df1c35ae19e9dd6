//! Bundled miniature subject projects and their hand-derived ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Config, Settings};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::generate::Generation;
use crate::model::TargetRecord;
use crate::pipeline::Pipeline;
use crate::runner::report::{FinalizedRow, Report};
use crate::runner::{Category, Classification};
use crate::scalar::Tuple;

pub const GROUND_TRUTH: &str = "ground-truth.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedPut {
    pub category: Category,
    /// Provider rows the PUT passes on, as argument tuples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass_values: Option<Vec<Tuple>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedFinalized {
    pub merged_from: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub name: String,
    /// Target method ids, as listed in `targets.json`.
    pub targets: Vec<String>,
    /// Original tuples per target, in source order.
    pub originals: BTreeMap<String, Vec<Tuple>>,
    pub union_sizes: BTreeMap<String, usize>,
    pub put_count: usize,
    /// PUTs dropped at generation because a call site sits inside a removed assertion.
    #[serde(default)]
    pub excluded: Vec<String>,
    /// Every executed PUT.
    pub puts: BTreeMap<String, ExpectedPut>,
    /// Every finalized PUT with the PUTs it replaces.
    #[serde(default)]
    pub finalized: BTreeMap<String, ExpectedFinalized>,
}

impl GroundTruth {
    pub fn load(fixture: &Path) -> Result<GroundTruth> {
        let path = fixture.join(GROUND_TRUTH);
        if !path.is_file() {
            return Err(Error::Config(format!("{} not found", path.display())));
        }
        serde_json::from_str(&fsutil::read(&path)?).map_err(|e| Error::json(path.display().to_string(), e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureOutcome {
    pub name: String,
    pub mismatches: Vec<String>,
    pub report: Report,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn diff<T: std::fmt::Debug + PartialEq>(what: &str, expected: &T, actual: &T, out: &mut Vec<String>) {
    if expected != actual {
        out.push(format!("{what}: expected {expected:?}, got {actual:?}"));
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&fsutil::read(path)?).map_err(|e| Error::json(path.display().to_string(), e))
}

/// Runs every stage on the fixture at `dir` with `settings` layered over its
/// `putforge.toml` and compares the artifacts with `ground-truth.json`.
pub fn verify_fixture(dir: &Path, settings: Settings) -> Result<FixtureOutcome> {
    let truth = GroundTruth::load(dir)?;
    let pipeline = Pipeline::new(Config::load(dir, None, settings)?);
    let summary = pipeline.run_all()?;
    let ws = &pipeline.workspace;
    let mut m = Vec::new();

    let targets: Vec<TargetRecord> = read_json(&ws.targets_json())?;
    let ids: Vec<String> = targets.into_iter().map(|t| t.id).collect();
    diff("targets", &truth.targets, &ids, &mut m);

    let unions = crate::capture::UnionFile::from_json(&fsutil::read(&ws.union_json())?)?.0;
    let sizes: BTreeMap<String, usize> = unions.iter().map(|(k, u)| (k.clone(), u.len())).collect();
    diff("union sizes", &truth.union_sizes, &sizes, &mut m);
    let originals: BTreeMap<String, Vec<Tuple>> = unions
        .iter()
        .map(|(k, u)| (k.clone(), u.originals().into_iter().cloned().collect()))
        .filter(|(_, o): &(String, Vec<Tuple>)| !o.is_empty())
        .collect();
    diff("originals", &truth.originals, &originals, &mut m);

    let generation: Generation = read_json(&ws.generation_json())?;
    diff("PUT count", &truth.put_count, &generation.put_count(), &mut m);
    let excluded: Vec<String> = generation.excluded.iter().map(|e| e.put.clone()).collect();
    diff("excluded PUTs", &truth.excluded, &excluded, &mut m);

    let classes: BTreeMap<String, Classification> = read_json(&ws.classification_json())?;
    let expected_ids: BTreeSet<&String> = truth.puts.keys().collect();
    let actual_ids: BTreeSet<&String> = classes.keys().collect();
    diff("classified PUTs", &expected_ids, &actual_ids, &mut m);
    for (id, expected) in &truth.puts {
        let Some(actual) = classes.get(id) else { continue };
        diff(&format!("{id} category"), &expected.category, &actual.category, &mut m);
        if let Some(values) = &expected.pass_values {
            let Some((unit, _)) = generation.put(id) else { continue };
            let passing: BTreeSet<&Tuple> = actual.pass_rows.iter().map(|&r| &unit.provider.rows[r]).collect();
            diff(&format!("{id} passing arguments"), &values.iter().collect(), &passing, &mut m);
        }
    }

    let finalized: Vec<FinalizedRow> = read_json(&ws.finalized_json())?;
    let actual: BTreeMap<String, ExpectedFinalized> = finalized
        .iter()
        .map(|f| {
            (
                f.put.clone(),
                ExpectedFinalized {
                    merged_from: f.merged_from.clone(),
                    rows: f.rows,
                },
            )
        })
        .collect();
    diff("finalized PUTs", &truth.finalized, &actual, &mut m);
    for f in finalized.iter().filter(|f| !f.green()) {
        m.push(format!("finalized {} passes {}/{} rows on re-run", f.put, f.passed_rows, f.rows));
    }
    if !summary.report.partition_holds() {
        m.push("report categories do not partition the executed PUTs".into());
    }
    Ok(FixtureOutcome {
        name: truth.name,
        mismatches: m,
        report: summary.report,
    })
}
