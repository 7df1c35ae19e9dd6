//! The pipeline stages over one project and its workspace: analyze,
//! capture, generate, classify and report. Every artifact lives under the
//! workspace; the subject project is only read.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use crate::analysis::{analyze, AnalysisOptions, ProjectModel};
use crate::capture::{self, build_union, CaptureRecord, CaptureUnion, Context, KindTable, UnionFile};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::generate::{self, cut_originals, merged_originals, GenerateOptions, Generation, GeneratedFiles};
use crate::instrument::{self, CaptureSession, InstrumentationPlan};
use crate::model::{TargetRecord, TestRecord};
use crate::runner::finalize::{self, FinalizedUnit};
use crate::runner::report::{self, FinalizedRow, Report, SummaryInputs};
use crate::runner::{self, classify, Classification, Outcome, RunOptions, RunUnit, Verdict};
use crate::scalar::Tuple;

/// Artifact locations inside a workspace directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    pub root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace { root: root.into() }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn targets_json(&self) -> PathBuf {
        self.file("targets.json")
    }
    pub fn tests_json(&self) -> PathBuf {
        self.file("tests.json")
    }
    pub fn capture_log(&self, mode: Context) -> PathBuf {
        self.file(&format!("capture.{mode}.jsonl"))
    }
    pub fn union_json(&self) -> PathBuf {
        self.file("union.json")
    }
    pub fn puts_json(&self) -> PathBuf {
        self.file("puts.json")
    }
    pub fn generation_json(&self) -> PathBuf {
        self.file("generation.json")
    }
    pub fn verdicts_jsonl(&self) -> PathBuf {
        self.file("verdicts.jsonl")
    }
    pub fn classification_json(&self) -> PathBuf {
        self.file("classification.json")
    }
    pub fn run_excluded_json(&self) -> PathBuf {
        self.file("run-excluded.json")
    }
    pub fn finalized_json(&self) -> PathBuf {
        self.file("finalized.json")
    }
    pub fn finalized_verdicts_jsonl(&self) -> PathBuf {
        self.file("finalized-verdicts.jsonl")
    }
    pub fn report_json(&self) -> PathBuf {
        self.file("report.json")
    }
    pub fn report_md(&self) -> PathBuf {
        self.file("report.md")
    }
    pub fn generated_puts(&self) -> PathBuf {
        self.file(generate::GENERATED_DIR)
    }
    pub fn finalized_puts(&self) -> PathBuf {
        self.file(finalize::FINALIZED_DIR)
    }
    /// Instrumented copy of the project.
    pub fn instrumented_project(&self) -> PathBuf {
        self.root.join("build").join("instrumented")
    }
    /// Copy of the project holding the generated units.
    pub fn generated_project(&self) -> PathBuf {
        self.root.join("build").join("generated")
    }
    /// Copy of the project holding the finalized units.
    pub fn finalized_project(&self) -> PathBuf {
        self.root.join("build").join("finalized")
    }
    fn instrumented_stamp(&self) -> PathBuf {
        self.root.join("build").join("instrumented.stamp")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzeSummary {
    pub targets: usize,
    pub tests: usize,
    pub cuts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureSummary {
    pub session: CaptureSession,
    pub records: usize,
    pub rejected: Vec<String>,
    /// The instrumented build was reused from an earlier session.
    pub reused: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateSummary {
    pub puts: usize,
    pub units: usize,
    pub excluded: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifySummary {
    pub report: Report,
    pub warnings: Vec<String>,
}

pub struct Pipeline {
    pub config: Config,
    pub workspace: Workspace,
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    text
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, stage: &str) -> Result<T> {
    if !path.is_file() {
        return Err(Error::MissingPrerequisite(format!(
            "{} not found; run `putforge {stage}` first",
            path.display()
        )));
    }
    serde_json::from_str(&fsutil::read(path)?).map_err(|e| Error::json(path.display().to_string(), e))
}

/// Classifications of every executed PUT, in manifest order.
pub fn classify_all(
    generation: &Generation,
    verdicts: &[Verdict],
    excluded: &BTreeSet<String>,
) -> Result<Vec<Classification>> {
    let mut outcomes: BTreeMap<&str, Vec<Option<Outcome>>> = BTreeMap::new();
    let sizes: BTreeMap<&str, usize> = generation
        .units
        .iter()
        .flat_map(|u| u.puts.iter().map(move |p| (p.id.as_str(), u.provider.len())))
        .collect();
    for v in verdicts {
        let Some(&size) = sizes.get(v.put.as_str()) else {
            return Err(Error::Classify {
                put: v.put.clone(),
                message: "verdict for an unknown PUT".into(),
            });
        };
        let row = outcomes.entry(v.put.as_str()).or_insert_with(|| vec![None; size]);
        if v.row >= size {
            return Err(Error::Classify {
                put: v.put.clone(),
                message: format!("row {} beyond provider size {size}", v.row),
            });
        }
        row[v.row] = Some(v.outcome);
    }
    let mut out = Vec::new();
    for unit in &generation.units {
        let originals: BTreeSet<usize> = unit.provider.original_rows().into_iter().collect();
        for put in &unit.puts {
            if excluded.contains(&put.id) {
                continue;
            }
            let empty = vec![None; unit.provider.len()];
            let row = outcomes.get(put.id.as_str()).unwrap_or(&empty);
            out.push(classify(&put.id, row, &originals)?);
        }
    }
    Ok(out)
}

/// Fingerprint of the project sources and the instrumentation settings.
fn source_stamp(root: &Path, skip: &Path, plan: &[String], cap: u64) -> Result<String> {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    plan.hash(&mut hasher);
    cap.hash(&mut hasher);
    let skip = fsutil::absolute(skip);
    let walker = WalkDir::new(root).sort_by_file_name().into_iter().filter_entry(|e| {
        let rel = e.path().strip_prefix(root).unwrap_or(e.path());
        let top = rel.components().count() == 1 && matches!(rel.to_str(), Some("target") | Some(".git"));
        !top && !e.path().starts_with(&skip)
    });
    let mut files = 0usize;
    for entry in walker {
        let entry = entry.map_err(|e| Error::io(root, e.into()))?;
        if entry.file_type().is_file() {
            let bytes = std::fs::read(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
            entry.path().strip_prefix(root).unwrap_or(entry.path()).hash(&mut hasher);
            bytes.hash(&mut hasher);
            files += 1;
        }
    }
    Ok(format!("{:016x} {files}", hasher.finish()))
}

impl Pipeline {
    pub fn new(config: Config) -> Self {
        let workspace = Workspace::new(config.workspace.clone());
        Pipeline { config, workspace }
    }

    fn root(&self) -> &Path {
        &self.config.project_root
    }

    fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            allow_list: self.config.assertion_allow_list.clone(),
            exclude: self.config.exclude.clone(),
        }
    }

    pub fn model(&self) -> Result<ProjectModel> {
        analyze(self.root(), &self.analysis_options())
    }

    fn generate_options(&self) -> GenerateOptions {
        GenerateOptions {
            adapter: self.config.adapter.clone(),
            row_cap: self.config.provider_row_cap,
            per_site_variants: self.config.per_site_variants,
        }
    }

    fn run_options(&self) -> RunOptions {
        RunOptions {
            timeout: self.config.per_row_timeout,
            retries: self.config.retries,
            jobs: self.config.jobs,
            parallel_rows: self.config.parallel_rows,
            env: Vec::new(),
        }
    }

    /// Writes `targets.json` and `tests.json`.
    pub fn analyze(&self) -> Result<(ProjectModel, AnalyzeSummary)> {
        let model = self.model()?;
        let targets: Vec<TargetRecord> = model.targets.iter().map(|t| t.record()).collect();
        let tests: Vec<TestRecord> = model.tests.iter().map(|t| t.summary()).collect();
        fsutil::write(&self.workspace.targets_json(), pretty(&targets))?;
        fsutil::write(&self.workspace.tests_json(), pretty(&tests))?;
        let summary = AnalyzeSummary {
            targets: targets.len(),
            tests: tests.len(),
            cuts: model.tests.iter().filter(|t| !t.target_calls.is_empty()).count(),
        };
        Ok((model, summary))
    }

    /// Instruments the project, reusing an earlier instrumented build when
    /// the sources and settings are unchanged. Returns whether it was reused.
    pub fn ensure_instrumented(&self, model: &ProjectModel) -> Result<bool> {
        let targets: Vec<String> = model.targets.iter().map(|t| t.id.clone()).collect();
        let out = self.workspace.instrumented_project();
        let stamp = source_stamp(self.root(), &self.workspace.root, &targets, self.config.max_records_per_target)?;
        let stamp_file = self.workspace.instrumented_stamp();
        if out.is_dir() && stamp_file.is_file() && fsutil::read(&stamp_file)? == stamp {
            return Ok(true);
        }
        fsutil::remove_dir(&out)?;
        if stamp_file.exists() {
            std::fs::remove_file(&stamp_file).map_err(|e| Error::io(&stamp_file, e))?;
        }
        let plan = InstrumentationPlan {
            targets,
            output_root: out,
            max_records_per_target: self.config.max_records_per_target,
            skip: vec![self.workspace.root.clone()],
        };
        instrument::instrument(self.root(), model, &plan, true)?;
        fsutil::write(&stamp_file, stamp)?;
        Ok(false)
    }

    /// Runs the test command (mode `test`) or the workload (mode `field`)
    /// over the instrumented copy and writes `capture.<mode>.jsonl`.
    pub fn capture(&self, mode: Context, command: Option<&str>) -> Result<CaptureSummary> {
        let command = match (command, mode) {
            (Some(c), _) => c.to_owned(),
            (None, Context::Test) => self.config.test_command.clone(),
            (None, Context::Field) => self.config.workload_command.clone().ok_or_else(|| {
                Error::Config("field capture needs a workload command (workload_command or --cmd)".into())
            })?,
        };
        let (model, _) = self.analyze()?;
        let reused = self.ensure_instrumented(&model)?;
        let log = self.workspace.capture_log(mode);
        let session = instrument::run_captured(&self.workspace.instrumented_project(), mode, &command, &log)?;
        let loaded = capture::load(&log, &kind_table(&model))?;
        let mut session = session;
        session.warnings.extend(loaded.warnings);
        Ok(CaptureSummary {
            session,
            records: loaded.records.len(),
            rejected: loaded.rejected,
            reused,
        })
    }

    fn load_records(&self, model: &ProjectModel) -> Result<(Vec<CaptureRecord>, Vec<String>)> {
        let kinds = kind_table(model);
        let mut records = Vec::new();
        let mut notes = Vec::new();
        let mut found = false;
        for mode in [Context::Test, Context::Field] {
            let path = self.workspace.capture_log(mode);
            if !path.is_file() {
                continue;
            }
            found = true;
            let loaded = capture::load(&path, &kinds)?;
            records.extend(loaded.records);
            notes.extend(loaded.warnings);
            notes.extend(loaded.rejected.into_iter().map(|r| format!("rejected capture line: {r}")));
        }
        if !found {
            return Err(Error::MissingPrerequisite(
                "no capture log in the workspace; run `putforge capture` first".into(),
            ));
        }
        Ok((records, notes))
    }

    /// Builds the unions, derives and renders the PUTs and writes
    /// `union.json`, `puts.json`, `generation.json` and `generated-puts/`.
    pub fn generate(&self) -> Result<GenerateSummary> {
        let model = self.model()?;
        let (records, load_notes) = self.load_records(&model)?;
        let per_cut = cut_originals(&model, &records);
        let merged = merged_originals(&model, &per_cut);
        let unions = build_union(&records, &merged);
        fsutil::write(&self.workspace.union_json(), UnionFile(unions.clone()).to_json())?;

        let (mut generation, files) =
            generate::generate(&model, self.root(), &unions, &per_cut, &records, &self.generate_options())?;
        let mut notes = load_notes;
        notes.append(&mut generation.notes);
        generation.notes = notes;
        if generation.put_count() == 0 {
            generation.notes.push("0 PUTs: no CUT invokes a qualifying target".into());
        }
        fsutil::write(&self.workspace.puts_json(), pretty(&generation.manifest()))?;
        fsutil::write(&self.workspace.generation_json(), pretty(&generation))?;
        self.write_units(&self.workspace.generated_puts(), generate::GENERATED_DIR, &files)?;
        let units: Vec<(String, String)> = generation.units.iter().map(|u| (u.name.clone(), u.file.clone())).collect();
        generate::write_project(
            self.root(),
            &self.workspace.generated_project(),
            &units,
            &files,
            std::slice::from_ref(&self.workspace.root),
        )?;
        Ok(GenerateSummary {
            puts: generation.put_count(),
            units: generation.units.len(),
            excluded: generation.excluded.len(),
            notes: generation.notes,
        })
    }

    fn write_units(&self, dir: &Path, prefix: &str, files: &GeneratedFiles) -> Result<()> {
        fsutil::remove_dir(dir)?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (rel, text) in files {
            let name = rel.strip_prefix(&format!("{prefix}/")).unwrap_or(rel);
            fsutil::write(&dir.join(name), text)?;
        }
        Ok(())
    }

    /// Executes every generated PUT, classifies it, finalizes the
    /// falsifiably-coupled ones, re-runs them and writes the reports.
    pub fn classify(&self) -> Result<ClassifySummary> {
        let generation: Generation = read_json(&self.workspace.generation_json(), "generate")?;
        let model = self.model()?;
        let project = self.workspace.generated_project();
        if !project.join("Cargo.toml").is_file() {
            return Err(Error::MissingPrerequisite(format!(
                "{} not found; run `putforge generate` first",
                project.display()
            )));
        }
        let options = self.run_options();
        let units: Vec<RunUnit> = generation.units.iter().map(RunUnit::from).collect();
        let execution = runner::execute(&project, &units, &options)?;
        fsutil::write(&self.workspace.verdicts_jsonl(), runner::verdicts_jsonl(&execution.verdicts))?;
        fsutil::write(&self.workspace.run_excluded_json(), pretty(&execution.excluded))?;
        let mut warnings: Vec<String> =
            execution.excluded.iter().map(|e| format!("{} excluded: {}", e.put, e.reason)).collect();

        let excluded: BTreeSet<String> = execution.excluded.iter().map(|e| e.put.clone()).collect();
        let classifications = classify_all(&generation, &execution.verdicts, &excluded)?;
        let by_put: BTreeMap<String, Classification> =
            classifications.iter().map(|c| (c.put.clone(), c.clone())).collect();
        fsutil::write(&self.workspace.classification_json(), pretty(&by_put))?;

        let (finalized, files) = finalize::finalize(&generation, &by_put, &model, self.root(), &self.config.adapter)?;
        self.write_units(&self.workspace.finalized_puts(), finalize::FINALIZED_DIR, &files)?;
        let rows = self.rerun_finalized(&finalized, &files, &options, &mut warnings)?;
        fsutil::write(&self.workspace.finalized_json(), pretty(&rows))?;

        let report = self.report()?;
        Ok(ClassifySummary { report, warnings })
    }

    fn rerun_finalized(
        &self,
        finalized: &[FinalizedUnit],
        files: &GeneratedFiles,
        options: &RunOptions,
        warnings: &mut Vec<String>,
    ) -> Result<Vec<FinalizedRow>> {
        let out = self.workspace.finalized_project();
        if finalized.is_empty() {
            fsutil::remove_dir(&out)?;
            fsutil::write(&self.workspace.finalized_verdicts_jsonl(), "")?;
            return Ok(Vec::new());
        }
        let units: Vec<(String, String)> = finalized.iter().map(|u| (u.name.clone(), u.file.clone())).collect();
        generate::write_project(self.root(), &out, &units, files, std::slice::from_ref(&self.workspace.root))?;
        let run_units: Vec<RunUnit> = finalized.iter().map(RunUnit::from).collect();
        let execution = runner::execute(&out, &run_units, options)?;
        fsutil::write(&self.workspace.finalized_verdicts_jsonl(), runner::verdicts_jsonl(&execution.verdicts))?;
        warnings.extend(execution.excluded.iter().map(|e| format!("finalized {} excluded: {}", e.put, e.reason)));
        let mut rows = Vec::new();
        for unit in finalized {
            for p in &unit.puts {
                let passed_rows = execution
                    .verdicts
                    .iter()
                    .filter(|v| v.put == p.put.id && v.outcome == Outcome::Pass)
                    .count();
                rows.push(FinalizedRow {
                    put: p.put.id.clone(),
                    merged_from: p.merged_from.clone(),
                    assertions: p.put.kept_assertions.len(),
                    rows: p.provider.len(),
                    passed_rows,
                });
            }
        }
        Ok(rows)
    }

    /// Rebuilds `report.json` and `report.md` from the stored artifacts.
    pub fn report(&self) -> Result<Report> {
        let generation: Generation = read_json(&self.workspace.generation_json(), "generate")?;
        let verdicts_path = self.workspace.verdicts_jsonl();
        if !verdicts_path.is_file() {
            return Err(Error::MissingPrerequisite(format!(
                "{} not found; run `putforge classify` first",
                verdicts_path.display()
            )));
        }
        let verdicts = runner::parse_verdicts(&fsutil::read(&verdicts_path)?)?;
        let run_excluded: Vec<generate::ExcludedPut> = read_json(&self.workspace.run_excluded_json(), "classify")?;
        let finalized: Vec<FinalizedRow> = read_json(&self.workspace.finalized_json(), "classify")?;
        let unions = UnionFile::from_json(&fsutil::read(&self.workspace.union_json())?)?.0;
        let model = self.model()?;

        let excluded: BTreeSet<String> = run_excluded.iter().map(|e| e.put.clone()).collect();
        let classifications = classify_all(&generation, &verdicts, &excluded)?;
        let originals: BTreeMap<String, Vec<Tuple>> = unions
            .iter()
            .map(|(id, u): (&String, &CaptureUnion)| (id.clone(), u.originals().into_iter().cloned().collect()))
            .collect();
        let report = report::summarize(SummaryInputs {
            model: &model,
            unions: &unions,
            originals: &originals,
            generation: &generation,
            classifications: &classifications,
            run_excluded: &run_excluded,
            finalized: &finalized,
        });
        fsutil::write(&self.workspace.report_json(), report.to_json())?;
        fsutil::write(&self.workspace.report_md(), report.to_markdown())?;
        Ok(report)
    }

    /// Every stage in order; field capture only when a workload is configured.
    pub fn run_all(&self) -> Result<ClassifySummary> {
        self.analyze()?;
        let mut warnings = Vec::new();
        let test = self.capture(Context::Test, None)?;
        warnings.extend(test.session.warnings);
        let field_log = self.workspace.capture_log(Context::Field);
        if self.config.workload_command.is_some() {
            let field = self.capture(Context::Field, None)?;
            warnings.extend(field.session.warnings);
        } else if field_log.exists() {
            std::fs::remove_file(&field_log).map_err(|e| Error::io(&field_log, e))?;
        }
        self.generate()?;
        let mut summary = self.classify()?;
        warnings.append(&mut summary.warnings);
        summary.warnings = warnings;
        Ok(summary)
    }
}

/// Parameter kinds of every target of `model`, for validating capture lines.
pub fn kind_table(model: &ProjectModel) -> KindTable {
    model.targets.iter().map(|t| (t.id.clone(), t.kinds())).collect()
}
