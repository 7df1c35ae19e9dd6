//! Suite-ready versions of falsifiably-coupled PUTs: providers pruned to
//! the passing rows, and PUTs with identical pruned providers merged.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Category, Classification, RunUnit};
use crate::analysis::ProjectModel;
use crate::error::Result;
use crate::fsutil;
use crate::generate::{derive_put, render_unit, ArgumentProvider, GeneratedFiles, Generation, ProviderGroup, PutSpec, UnitSource};

/// Directory of finalized units inside the finalized project copy.
pub const FINALIZED_DIR: &str = "finalized-puts";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalizedPut {
    pub put: PutSpec,
    /// Ids of the classified PUTs this one replaces.
    pub merged_from: Vec<String>,
    pub provider: ArgumentProvider,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalizedUnit {
    pub name: String,
    pub file: String,
    pub cut: String,
    pub target: String,
    pub puts: Vec<FinalizedPut>,
    pub row_tests: BTreeMap<String, Vec<String>>,
}

impl From<&FinalizedUnit> for RunUnit {
    fn from(unit: &FinalizedUnit) -> Self {
        RunUnit {
            name: unit.name.clone(),
            puts: unit
                .puts
                .iter()
                .map(|p| (p.put.id.clone(), unit.row_tests.get(&p.put.id).cloned().unwrap_or_default()))
                .collect(),
        }
    }
}

/// The provider restricted to the rows the PUT passed on, in provider
/// order, so originals stay in front.
pub fn prune(provider: &ArgumentProvider, classification: &Classification) -> ArgumentProvider {
    let rows: Vec<usize> = classification.pass_rows.iter().copied().collect();
    provider.restrict(&rows, vec![classification.put.clone()])
}

/// Groups the falsifiably-coupled PUTs of every unit by their pass rows and
/// renders one finalized unit per generated unit that has any.
pub fn finalize(
    generation: &Generation,
    classifications: &BTreeMap<String, Classification>,
    model: &ProjectModel,
    project_root: &Path,
    adapter: &str,
) -> Result<(Vec<FinalizedUnit>, GeneratedFiles)> {
    let mut units = Vec::new();
    let mut files = GeneratedFiles::new();
    for unit in &generation.units {
        let mut groups: Vec<(BTreeSet<usize>, Vec<&PutSpec>)> = Vec::new();
        for put in &unit.puts {
            let Some(c) = classifications.get(&put.id) else { continue };
            if c.category != Category::FalsifiablyCoupled {
                continue;
            }
            match groups.iter_mut().find(|(rows, _)| *rows == c.pass_rows) {
                Some((_, members)) => members.push(put),
                None => groups.push((c.pass_rows.clone(), vec![put])),
            }
        }
        if groups.is_empty() {
            continue;
        }
        let cut = model.test(&unit.cut).expect("generated from a known CUT");
        let target = model.target(&unit.target).expect("generated for a known target");
        let file_text = fsutil::read(&project_root.join(&cut.file))?;
        let mut puts = Vec::new();
        for (pass_rows, members) in groups {
            let first = members[0];
            let put = if members.len() == 1 {
                first.clone()
            } else {
                let mut kept: Vec<usize> = members.iter().flat_map(|p| p.kept_assertions.iter().copied()).collect();
                kept.sort_unstable();
                kept.dedup();
                let joined: Vec<String> = kept.iter().map(usize::to_string).collect();
                let suffix = format!("{}_{}{}", first.short, joined.join("_"), first.variant);
                let mut name = format!("{}_PUT_{suffix}", cut.name);
                let mut n = 2;
                while crate::generate::derive::mentions_ident(&file_text, &name) {
                    name = format!("{}_PUT_{suffix}_{n}", cut.name);
                    n += 1;
                }
                let mut put = derive_put(cut, &file_text, target, &first.site, &kept, name, format!("{}_PUT_{suffix}", cut.id));
                put.short = first.short.clone();
                put.variant = first.variant.clone();
                put
            };
            let rows: Vec<usize> = pass_rows.into_iter().collect();
            puts.push(FinalizedPut {
                provider: unit.provider.restrict(&rows, vec![put.id.clone()]),
                merged_from: members.iter().map(|p| p.id.clone()).collect(),
                put,
            });
        }
        let file = format!("{FINALIZED_DIR}/{}.rs", unit.name);
        let test_spans = model.tests.iter().filter(|t| t.file == cut.file).map(|t| t.span).collect();
        let rendered = render_unit(
            adapter,
            &UnitSource {
                cut,
                file_text: &file_text,
                test_spans,
                unit_file: &file,
                groups: puts
                    .iter()
                    .map(|p| ProviderGroup {
                        function: format!("provide_{}", p.put.name),
                        provider: &p.provider,
                        puts: vec![&p.put],
                    })
                    .collect(),
            },
            Some(project_root),
        )?;
        files.insert(file.clone(), rendered.text);
        units.push(FinalizedUnit {
            name: unit.name.clone(),
            file,
            cut: unit.cut.clone(),
            target: unit.target.clone(),
            puts,
            row_tests: rendered.row_tests,
        });
    }
    Ok((units, files))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Canonical, ScalarKind, Tuple};

    fn provider(n: usize) -> ArgumentProvider {
        ArgumentProvider {
            put_ids: vec!["p".into()],
            rows: (0..n)
                .map(|i| Tuple::new(vec![Canonical::parse(ScalarKind::Text, &format!("s:{i}")).unwrap()]))
                .collect(),
            original_flags: (0..n).map(|i| i == 0).collect(),
            trimmed: 0,
        }
    }

    fn classification(pass: &[usize]) -> Classification {
        Classification {
            put: "p".into(),
            category: Category::FalsifiablyCoupled,
            pass_rows: pass.iter().copied().collect(),
            original_rows: BTreeSet::from([0]),
            rows: 12,
            errors: 0,
            timeouts: 0,
        }
    }

    #[test]
    fn pruning_keeps_exactly_the_pass_rows() {
        let p = provider(12);
        let pruned = prune(&p, &classification(&[0, 8]));
        assert_eq!(pruned.rows, vec![p.rows[0].clone(), p.rows[8].clone()]);
        assert_eq!(pruned.original_flags, vec![true, false]);
        let all_but_one: Vec<usize> = (0..12).filter(|r| *r != 5).collect();
        assert_eq!(prune(&p, &classification(&all_but_one)).len(), 11);
    }
}
