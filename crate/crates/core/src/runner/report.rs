//! Run summary: one module row in the shape of the classification table,
//! per-target coverage and per-PUT results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Category, Classification};
use crate::analysis::ProjectModel;
use crate::capture::{coverage_gain, CaptureUnion, Provenance};
use crate::generate::{ExcludedPut, Generation};
use crate::scalar::Tuple;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModuleRow {
    pub module: String,
    pub target_methods: usize,
    /// CUTs directly invoking at least one target method.
    pub cuts: usize,
    pub original_args_median: f64,
    pub puts: usize,
    pub captured_args_median: f64,
    pub executed: usize,
    pub ill_formed: usize,
    pub strongly_coupled: usize,
    pub falsifiably_coupled: usize,
    pub decoupled: usize,
    pub errors: usize,
    pub timeouts: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRow {
    pub target: String,
    pub original_count: usize,
    pub union_count: usize,
    pub test_count: usize,
    pub field_count: usize,
    pub factor: f64,
    pub orders_of_magnitude: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PutRow {
    pub put: String,
    pub category: Category,
    pub rows: usize,
    pub pass_rows: usize,
    pub errors: usize,
    pub timeouts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalizedRow {
    pub put: String,
    pub merged_from: Vec<String>,
    pub assertions: usize,
    pub rows: usize,
    pub passed_rows: usize,
}

impl FinalizedRow {
    pub fn green(&self) -> bool {
        self.rows == self.passed_rows
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub module: ModuleRow,
    pub targets: Vec<TargetRow>,
    pub puts: Vec<PutRow>,
    pub excluded: Vec<ExcludedPut>,
    pub finalized: Vec<FinalizedRow>,
    pub notes: Vec<String>,
}

fn median(mut values: Vec<usize>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] + values[mid]) as f64 / 2.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SummaryInputs<'a> {
    pub model: &'a ProjectModel,
    pub unions: &'a BTreeMap<String, CaptureUnion>,
    pub originals: &'a BTreeMap<String, Vec<Tuple>>,
    pub generation: &'a Generation,
    /// In execution order.
    pub classifications: &'a [Classification],
    /// PUTs left out at run time, such as those of units that did not compile.
    pub run_excluded: &'a [ExcludedPut],
    pub finalized: &'a [FinalizedRow],
}

pub fn summarize(inputs: SummaryInputs<'_>) -> Report {
    let SummaryInputs {
        model,
        unions,
        originals,
        generation,
        classifications,
        run_excluded,
        finalized,
    } = inputs;
    let mut targets = Vec::new();
    for t in &model.targets {
        let original_count = originals.get(&t.id).map(Vec::len).unwrap_or(0);
        let union = unions.get(&t.id);
        let union_count = union.map(CaptureUnion::len).unwrap_or(0);
        let gain = coverage_gain(union_count, original_count);
        targets.push(TargetRow {
            target: t.id.clone(),
            original_count,
            union_count,
            test_count: union.map(|u| u.count_from(Provenance::Test)).unwrap_or(0),
            field_count: union.map(|u| u.count_from(Provenance::Field)).unwrap_or(0),
            factor: gain.factor,
            orders_of_magnitude: gain.orders_of_magnitude,
        });
    }
    let count = |c: Category| classifications.iter().filter(|x| x.category == c).count();
    let mut excluded = generation.excluded.clone();
    excluded.extend(run_excluded.iter().cloned());
    let module = ModuleRow {
        module: model.crate_name.clone(),
        target_methods: model.targets.len(),
        cuts: model.tests.iter().filter(|t| !t.target_calls.is_empty()).count(),
        original_args_median: median(targets.iter().map(|t| t.original_count).collect()),
        puts: generation.put_count(),
        captured_args_median: median(targets.iter().map(|t| t.union_count).collect()),
        executed: classifications.len(),
        ill_formed: count(Category::IllFormed),
        strongly_coupled: count(Category::StronglyCoupled),
        falsifiably_coupled: count(Category::FalsifiablyCoupled),
        decoupled: count(Category::Decoupled),
        errors: classifications.iter().filter(|c| c.errors > 0).count(),
        timeouts: classifications.iter().filter(|c| c.timeouts > 0).count(),
        excluded: excluded.len(),
    };
    Report {
        module,
        targets,
        puts: classifications
            .iter()
            .map(|c| PutRow {
                put: c.put.clone(),
                category: c.category,
                rows: c.rows,
                pass_rows: c.pass_rows.len(),
                errors: c.errors,
                timeouts: c.timeouts,
            })
            .collect(),
        excluded,
        finalized: finalized.to_vec(),
        notes: generation.notes.clone(),
    }
}

impl Report {
    /// Category totals cover exactly the executed PUTs that are not ill-formed.
    pub fn partition_holds(&self) -> bool {
        let m = &self.module;
        m.strongly_coupled + m.falsifiably_coupled + m.decoupled + m.ill_formed == m.executed
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn to_markdown(&self) -> String {
        let m = &self.module;
        let mut out = String::from("# PUT generation report\n\n## Module\n\n");
        out.push_str("| Module | Target methods | CUTs | #Orig. args (median) | PUTs | #Cap. args (median) | Strongly-coupled | Falsifiably-coupled | Decoupled |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|\n");
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n\n",
            m.module,
            m.target_methods,
            m.cuts,
            m.original_args_median,
            m.puts,
            m.captured_args_median,
            m.strongly_coupled,
            m.falsifiably_coupled,
            m.decoupled
        ));
        out.push_str(&format!(
            "Executed {} PUTs; {} ill-formed (left out of the category totals); {} with harness errors; {} with timeouts; {} excluded before execution.\n\n",
            m.executed, m.ill_formed, m.errors, m.timeouts, m.excluded
        ));
        out.push_str("## Target methods\n\n| Target | Original | Captured | From tests | From workload | Gain | Orders of magnitude |\n|---|---:|---:|---:|---:|---:|---:|\n");
        for t in &self.targets {
            out.push_str(&format!(
                "| `{}` | {} | {} | {} | {} | {} | {} |\n",
                t.target, t.original_count, t.union_count, t.test_count, t.field_count, t.factor, t.orders_of_magnitude
            ));
        }
        out.push_str("\n## PUTs\n\n| PUT | Category | Passing rows |\n|---|---|---:|\n");
        for p in &self.puts {
            out.push_str(&format!("| `{}` | {} | {}/{} |\n", p.put, p.category.as_str(), p.pass_rows, p.rows));
        }
        if !self.excluded.is_empty() {
            out.push_str("\n## Excluded\n\n");
            for e in &self.excluded {
                out.push_str(&format!("- `{}`: {}\n", e.put, e.reason));
            }
        }
        out.push_str("\n## Finalized\n\n| PUT | Replaces | Assertions | Rows | Re-run |\n|---|---|---:|---:|---|\n");
        for f in &self.finalized {
            out.push_str(&format!(
                "| `{}` | {} | {} | {} | {} |\n",
                f.put,
                f.merged_from.iter().map(|p| format!("`{p}`")).collect::<Vec<_>>().join(", "),
                f.assertions,
                f.rows,
                if f.green() { "green".to_owned() } else { format!("{}/{} passing", f.passed_rows, f.rows) }
            ));
        }
        if !self.notes.is_empty() {
            out.push_str("\n## Notes\n\n");
            for n in &self.notes {
                out.push_str(&format!("- {n}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{AnalysisReport, ProjectIndex};

    #[test]
    fn empty_run_is_all_zero() {
        let model = ProjectModel {
            crate_name: "empty".into(),
            index: ProjectIndex {
                crate_name: "empty".into(),
                callables: vec![],
            },
            targets: vec![],
            tests: vec![],
            report: AnalysisReport::default(),
        };
        let report = summarize(SummaryInputs {
            model: &model,
            unions: &BTreeMap::new(),
            originals: &BTreeMap::new(),
            generation: &Generation::default(),
            classifications: &[],
            run_excluded: &[],
            finalized: &[],
        });
        assert_eq!(
            report.module,
            ModuleRow {
                module: "empty".into(),
                ..ModuleRow::default()
            }
        );
        assert!(report.partition_holds());
        assert!(report.to_markdown().contains("| empty | 0 | 0 | 0 | 0 | 0 | 0 | 0 | 0 |"));
    }

    #[test]
    fn table_shaped_row_sums() {
        let m = ModuleRow {
            module: "pdfbox".into(),
            executed: 1150,
            strongly_coupled: 510,
            falsifiably_coupled: 161,
            decoupled: 479,
            ..ModuleRow::default()
        };
        let report = Report {
            module: m,
            ..Report::default()
        };
        assert!(report.partition_holds());
        assert!(report.to_markdown().contains("| 510 | 161 | 479 |"));
    }

    #[test]
    fn medians() {
        assert_eq!(median(vec![]), 0.0);
        assert_eq!(median(vec![3, 1, 2]), 2.0);
        assert_eq!(median(vec![4, 1, 2, 3]), 2.5);
    }
}
