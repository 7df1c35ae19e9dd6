//! Parameterized tests derived from CUTs, their argument providers and the
//! generated test units.

pub mod derive;
pub mod provider;
pub mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ProjectModel;
use crate::capture::{CaptureRecord, CaptureUnion, Context};
use crate::error::Result;
use crate::fsutil;
use crate::model::{TargetCallSite, TestCase};
use crate::scalar::Tuple;

pub use derive::{derive_put, plan, PutGenerationPlan, PutSpec};
pub use provider::{synthesize_provider, ArgumentProvider, DEFAULT_ROW_CAP};
pub use render::{render_unit, ProviderGroup, RenderedUnit, UnitSource, LIBTEST_ADAPTER};

/// Directory of generated units inside the generated project copy.
pub const GENERATED_DIR: &str = "generated-puts";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateOptions {
    pub adapter: String,
    pub row_cap: usize,
    pub per_site_variants: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            adapter: LIBTEST_ADAPTER.to_owned(),
            row_cap: provider::DEFAULT_ROW_CAP,
            per_site_variants: false,
        }
    }
}

/// Original tuples of one call site: its literal arguments when it has
/// them, otherwise every tuple the CUT passed to the target at runtime.
pub fn site_originals(cut: &TestCase, site: &TargetCallSite, records: &[CaptureRecord]) -> Vec<Tuple> {
    if let Some(t) = &site.static_tuple {
        return vec![t.clone()];
    }
    let mut attributed: Vec<&CaptureRecord> = records
        .iter()
        .filter(|r| {
            r.context == Context::Test
                && r.target == site.target
                && r.test_id.as_deref() == Some(cut.id.as_str())
                && !r.tuple.has_unserializable()
        })
        .collect();
    attributed.sort_by_key(|r| r.seq);
    let mut out: Vec<Tuple> = Vec::new();
    for r in attributed {
        if !out.contains(&r.tuple) {
            out.push(r.tuple.clone());
        }
    }
    out
}

/// Originals per CUT and target, taken at the first call site.
pub fn cut_originals(
    model: &ProjectModel,
    records: &[CaptureRecord],
) -> BTreeMap<String, BTreeMap<String, Vec<Tuple>>> {
    let mut out = BTreeMap::new();
    for cut in &model.tests {
        let mut per_target = BTreeMap::new();
        for target in cut.target_ids() {
            let site = cut.first_site(&target).expect("target id comes from a site");
            per_target.insert(target, site_originals(cut, site, records));
        }
        out.insert(cut.id.clone(), per_target);
    }
    out
}

/// Every CUT's originals merged per target, in test order.
pub fn merged_originals(
    model: &ProjectModel,
    per_cut: &BTreeMap<String, BTreeMap<String, Vec<Tuple>>>,
) -> BTreeMap<String, Vec<Tuple>> {
    let mut out: BTreeMap<String, Vec<Tuple>> = BTreeMap::new();
    for cut in &model.tests {
        for (target, tuples) in per_cut.get(&cut.id).into_iter().flatten() {
            let entry = out.entry(target.clone()).or_default();
            for t in tuples {
                if !entry.contains(t) {
                    entry.push(t.clone());
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedUnit {
    /// Cargo test target name.
    pub name: String,
    /// Project-relative path of the unit file.
    pub file: String,
    pub cut: String,
    pub target: String,
    pub provider: ArgumentProvider,
    pub puts: Vec<PutSpec>,
    pub row_tests: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedPut {
    pub put: String,
    pub reason: String,
}

/// Full state of a generation run, persisted as `generation.json`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Generation {
    pub plans: Vec<PutGenerationPlan>,
    pub units: Vec<GeneratedUnit>,
    pub excluded: Vec<ExcludedPut>,
    pub notes: Vec<String>,
}

/// Row of `puts.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PutManifestRow {
    pub put: String,
    pub cut: String,
    pub target: String,
    pub assertion_index: Vec<usize>,
    pub provider_size: usize,
    pub file: String,
}

impl Generation {
    pub fn manifest(&self) -> Vec<PutManifestRow> {
        self.units
            .iter()
            .flat_map(|u| {
                u.puts.iter().map(move |p| PutManifestRow {
                    put: p.id.clone(),
                    cut: p.source_cut.clone(),
                    target: p.target.clone(),
                    assertion_index: p.kept_assertions.clone(),
                    provider_size: u.provider.len(),
                    file: u.file.clone(),
                })
            })
            .collect()
    }

    pub fn put_count(&self) -> usize {
        self.units.iter().map(|u| u.puts.len()).sum()
    }

    pub fn put(&self, id: &str) -> Option<(&GeneratedUnit, &PutSpec)> {
        self.units
            .iter()
            .find_map(|u| u.puts.iter().find(|p| p.id == id).map(|p| (u, p)))
    }
}

/// Turns an arbitrary label into a valid identifier fragment.
pub fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Short names of a CUT's targets, widened with their owner path where
/// two targets share a name.
fn short_names(model: &ProjectModel, ids: &[String]) -> BTreeMap<String, String> {
    let name = |id: &str| model.target(id).map(|t| t.name.clone()).unwrap_or_else(|| sanitize(id));
    let mut out = BTreeMap::new();
    for id in ids {
        let short = name(id);
        let clash = ids.iter().filter(|other| name(other) == short).count() > 1;
        let short = if clash {
            let t = model.target(id).expect("known target");
            let mut s = sanitize(&t.path[1..].join("_"));
            if ids.iter().filter(|o| model.target(o).map(|x| &x.path) == Some(&t.path)).count() > 1 {
                let kinds: Vec<String> = t.kinds().iter().map(|k| sanitize(&k.to_string())).collect();
                s = format!("{s}_{}", kinds.join("_"));
            }
            s
        } else {
            short
        };
        out.insert(id.clone(), short);
    }
    out
}

fn unique_name(base: String, file_text: &str, taken: &mut BTreeSet<String>) -> String {
    let mut name = base.clone();
    let mut n = 2;
    while taken.contains(&name) || derive::mentions_ident(file_text, &name) {
        name = format!("{base}_{n}");
        n += 1;
    }
    taken.insert(name.clone());
    name
}

/// Generated unit files, keyed by project-relative path.
pub type GeneratedFiles = BTreeMap<String, String>;

/// Plans, derives and renders the PUTs of every CUT of `model`.
pub fn generate(
    model: &ProjectModel,
    project_root: &Path,
    unions: &BTreeMap<String, CaptureUnion>,
    originals: &BTreeMap<String, BTreeMap<String, Vec<Tuple>>>,
    records: &[CaptureRecord],
    options: &GenerateOptions,
) -> Result<(Generation, GeneratedFiles)> {
    render::check_adapter(&options.adapter)?;
    let mut generation = Generation::default();
    let mut files = GeneratedFiles::new();
    let mut unit_names: BTreeSet<String> = BTreeSet::new();
    let empty = BTreeMap::new();

    for cut in &model.tests {
        let cut_originals = originals.get(&cut.id).unwrap_or(&empty);
        let plan = plan(cut, unions, cut_originals);
        if plan.expected_put_count == 0 {
            generation.plans.push(plan);
            continue;
        }
        if !cut.integration {
            generation.notes.push(format!(
                "{}: tests inside the library are not parameterized; move the test under tests/ to include it",
                cut.id
            ));
            generation.plans.push(plan);
            continue;
        }
        if cut.ignored {
            generation.notes.push(format!("{}: ignored test, skipped", cut.id));
            generation.plans.push(plan);
            continue;
        }
        let file_text = fsutil::read(&project_root.join(&cut.file))?;
        let test_spans: Vec<_> = model.tests.iter().filter(|t| t.file == cut.file).map(|t| t.span).collect();
        let shorts = short_names(model, &plan.targets);
        let mut fn_names: BTreeSet<String> = BTreeSet::new();

        for target_id in &plan.targets {
            let target = model.target(target_id).expect("planned targets are known");
            let union = &unions[target_id];
            let short = &shorts[target_id];
            let mut sites: Vec<&TargetCallSite> = cut.target_calls.iter().filter(|s| &s.target == target_id).collect();
            if !options.per_site_variants {
                sites.truncate(1);
            }
            for (k, site) in sites.into_iter().enumerate() {
                let site_orig = if k == 0 {
                    cut_originals.get(target_id).cloned().unwrap_or_default()
                } else {
                    site_originals(cut, site, records)
                };
                if site_orig.is_empty() {
                    generation.notes.push(format!("{}: call site {} of {target_id} has no original argument, skipped", cut.id, k + 1));
                    continue;
                }
                let variant = if k == 0 { String::new() } else { format!("_site{}", k + 1) };
                let mut puts = Vec::new();
                for assertion in &cut.assertions {
                    let base = format!("{}_PUT_{short}_{}{variant}", cut.name, assertion.index);
                    let name = unique_name(base, &file_text, &mut fn_names);
                    let id = format!("{}_PUT_{short}_{}{variant}", cut.id, assertion.index);
                    let mut put = derive_put(cut, &file_text, target, site, &[assertion.index], name, id);
                    put.short = short.clone();
                    put.variant = variant.clone();
                    match &put.ill_formed_by_construction {
                        Some(reason) => generation.excluded.push(ExcludedPut {
                            put: put.id.clone(),
                            reason: reason.clone(),
                        }),
                        None => puts.push(put),
                    }
                }
                if puts.is_empty() {
                    continue;
                }
                let provider = synthesize_provider(
                    puts.iter().map(|p| p.id.clone()).collect(),
                    union,
                    &site_orig,
                    options.row_cap,
                )?;
                if provider.trimmed > 0 {
                    generation.notes.push(format!(
                        "{}: provider for {target_id} capped at {} rows ({} trimmed)",
                        cut.id,
                        provider.len(),
                        provider.trimmed
                    ));
                }
                let mut module_path = vec![cut.file.trim_start_matches("tests/").trim_end_matches(".rs").to_owned()];
                module_path.extend(cut.module_path.iter().cloned());
                let base = sanitize(&format!("putforge_{}__{}__{short}{variant}", module_path.join("__"), cut.name));
                let mut unit_name = base.clone();
                let mut n = 2;
                while !unit_names.insert(unit_name.clone()) {
                    unit_name = format!("{base}_{n}");
                    n += 1;
                }
                let unit_file = format!("{GENERATED_DIR}/{unit_name}.rs");
                let rendered = render_unit(
                    &options.adapter,
                    &UnitSource {
                        cut,
                        file_text: &file_text,
                        test_spans: test_spans.clone(),
                        unit_file: &unit_file,
                        groups: vec![ProviderGroup {
                            function: format!("provide_{short}{variant}"),
                            provider: &provider,
                            puts: puts.iter().collect(),
                        }],
                    },
                    Some(project_root),
                )?;
                files.insert(unit_file.clone(), rendered.text);
                generation.units.push(GeneratedUnit {
                    name: unit_name,
                    file: unit_file,
                    cut: cut.id.clone(),
                    target: target_id.clone(),
                    provider,
                    puts,
                    row_tests: rendered.row_tests,
                });
            }
        }
        generation.plans.push(plan);
    }
    Ok((generation, files))
}

/// Registers generated unit files as test targets in a manifest's text.
pub fn register_units(manifest: &str, units: &[(String, String)]) -> String {
    let mut out = manifest.to_owned();
    if !out.ends_with('\n') {
        out.push('\n');
    }
    for (name, file) in units {
        out.push_str(&format!("\n[[test]]\nname = \"{name}\"\npath = \"{file}\"\n"));
    }
    out
}

/// Writes a fresh copy of the project at `out` holding the given units.
pub fn write_project(
    project_root: &Path,
    out: &Path,
    units: &[(String, String)],
    files: &GeneratedFiles,
    skip: &[PathBuf],
) -> Result<()> {
    fsutil::remove_dir(out)?;
    fsutil::claim_empty_dir(out)?;
    let mut skip = skip.to_vec();
    skip.push(out.to_path_buf());
    fsutil::copy_project(project_root, out, &skip)?;
    for (rel, text) in files {
        fsutil::write(&out.join(rel), text)?;
    }
    let manifest = fsutil::read(&out.join("Cargo.toml"))?;
    fsutil::write(&out.join("Cargo.toml"), register_units(&manifest, units))
}
