//! Instrumented copies of a subject project and captured runs over them.

pub mod emitter;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::analysis::ProjectModel;
use crate::capture::Context;
use crate::cargo::{self, TestStatus};
use crate::error::{Error, Result};
use crate::fsutil;

pub const DEFAULT_MAX_RECORDS: u64 = 100_000;

/// What to instrument and where. The capture sink and session mode are
/// supplied at run time, so one instrumented build serves every session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstrumentationPlan {
    pub targets: Vec<String>,
    pub output_root: PathBuf,
    pub max_records_per_target: u64,
    /// Paths under the project root left out of the copy, such as a workspace.
    pub skip: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstrumentedProject {
    pub root: PathBuf,
    /// Project-relative files that received emitters.
    pub files: Vec<String>,
}

/// Inserts one emitter per target into `text`, which holds the bytes of `file`.
pub fn instrument_source(
    text: &str,
    model: &ProjectModel,
    file: &str,
    targets: &[String],
    cap: u64,
) -> Result<String> {
    let mut inserts: Vec<(usize, String)> = Vec::new();
    for id in targets {
        let target = model.target(id).ok_or_else(|| Error::TargetNotFound(id.clone()))?;
        if target.file != file {
            continue;
        }
        if target.body_open == 0 || text.as_bytes().get(target.body_open - 1) != Some(&b'{') {
            return Err(Error::TargetNotFound(format!("{id} (body not found in {file})")));
        }
        inserts.push((target.body_open, emitter::emitter(target, cap)));
    }
    inserts.sort_by_key(|i| std::cmp::Reverse(i.0));
    let mut out = text.to_owned();
    for (at, stmt) in inserts {
        out.insert_str(at, &stmt);
    }
    Ok(out)
}

/// Copies the project to `plan.output_root` and inserts an emitter at the
/// top of each planned target. With `build`, the copy is compiled.
pub fn instrument(
    project_root: &Path,
    model: &ProjectModel,
    plan: &InstrumentationPlan,
    build: bool,
) -> Result<InstrumentedProject> {
    if fsutil::same_path(project_root, &plan.output_root) {
        return Err(Error::Config("instrumentation output must differ from the project root".into()));
    }
    let missing: Vec<&str> = plan
        .targets
        .iter()
        .filter(|id| model.target(id).is_none())
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(Error::TargetNotFound(missing.join(", ")));
    }
    fsutil::claim_empty_dir(&plan.output_root)?;
    let mut skip = plan.skip.clone();
    skip.push(plan.output_root.clone());
    fsutil::copy_project(project_root, &plan.output_root, &skip)?;

    let mut files: Vec<String> = plan
        .targets
        .iter()
        .filter_map(|id| model.target(id).map(|t| t.file.clone()))
        .collect();
    files.sort();
    files.dedup();
    for file in &files {
        let text = fsutil::read(&project_root.join(file))?;
        let instrumented =
            instrument_source(&text, model, file, &plan.targets, plan.max_records_per_target)?;
        fsutil::write(&plan.output_root.join(file), instrumented)?;
    }
    if build {
        cargo::build_all(&plan.output_root, "instrumented project")?;
    }
    Ok(InstrumentedProject {
        root: plan.output_root.clone(),
        files,
    })
}

/// Outcome of one captured session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureSession {
    pub mode: Context,
    pub log: PathBuf,
    pub success: bool,
    pub failing_tests: Vec<String>,
    pub warnings: Vec<String>,
}

/// Runs `command` through `sh -c` inside the instrumented project with the
/// capture environment set. The log at `sink` is truncated first.
pub fn run_captured(root: &Path, mode: Context, command: &str, sink: &Path) -> Result<CaptureSession> {
    let sink = fsutil::absolute(sink);
    fsutil::write(&sink, "")?;
    let mut cmd = cargo::command("sh", root);
    cmd.arg("-c")
        .arg(command)
        .env(emitter::SINK_VAR, &sink)
        .env(emitter::MODE_VAR, mode.as_str());
    let out = cmd.output().map_err(|e| Error::Command {
        command: command.to_owned(),
        source: e,
    })?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let failing_tests: Vec<String> = cargo::parse_libtest(&stdout)
        .into_iter()
        .filter(|(_, s)| *s == TestStatus::Failed)
        .map(|(n, _)| n)
        .collect();
    let mut warnings = Vec::new();
    if !out.status.success() {
        let mut warning = format!("`{command}` exited with {} in {mode} mode", out.status);
        if !failing_tests.is_empty() {
            warning.push_str(&format!("; failing tests: {}", failing_tests.join(", ")));
        }
        let stderr = String::from_utf8_lossy(&out.stderr);
        let tail: Vec<&str> = stderr.lines().rev().take(20).collect();
        if failing_tests.is_empty() && !tail.is_empty() {
            warning.push('\n');
            warning.push_str(&tail.into_iter().rev().collect::<Vec<_>>().join("\n"));
        }
        warnings.push(warning);
    }
    Ok(CaptureSession {
        mode,
        log: sink,
        success: out.status.success(),
        failing_tests,
        warnings,
    })
}

/// Per-test verdicts of the instrumented suite, with capture going to `sink`.
pub fn instrumented_verdicts(root: &Path, sink: &Path) -> Result<BTreeMap<String, TestStatus>> {
    let sink = fsutil::absolute(sink);
    cargo::suite_verdicts(
        root,
        &[
            (emitter::SINK_VAR, sink.as_os_str()),
            (emitter::MODE_VAR, std::ffi::OsStr::new("test")),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze, AnalysisOptions};

    const LIB: &str = "pub struct S;\nimpl S {\n    pub fn set(&mut self, v: &str) -> usize { v.len() }\n}\n\npub fn scale(x: f64, n: Option<String>) -> f64 {\n    let _ = n;\n    x * 2.0\n}\n";
    const TEST: &str = "#[test]\nfn t() {\n    let mut s = suite::S;\n    assert_eq!(s.set(\"ab\"), 2);\n    assert_eq!(suite::scale(1.5, None), 3.0);\n}\n";

    fn project() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fsutil::write(&dir.path().join("Cargo.toml"), "[package]\nname = \"suite\"\nversion = \"0.1.0\"\nedition = \"2021\"\n\n[workspace]\n").unwrap();
        fsutil::write(&dir.path().join("src/lib.rs"), LIB).unwrap();
        fsutil::write(&dir.path().join("tests/t.rs"), TEST).unwrap();
        dir
    }

    #[test]
    fn removing_the_first_statement_restores_the_source() {
        let dir = project();
        let model = analyze(dir.path(), &AnalysisOptions::default()).unwrap();
        let ids: Vec<String> = model.targets.iter().map(|t| t.id.clone()).collect();
        assert_eq!(ids.len(), 2);
        let out = instrument_source(LIB, &model, "src/lib.rs", &ids, 5).unwrap();
        assert_ne!(out, LIB);

        let file: syn::File = syn::parse_str(&out).unwrap();
        let source = crate::analysis::SourceFile::new("src/lib.rs", out.clone());
        let mut firsts = Vec::new();
        for item in &file.items {
            match item {
                syn::Item::Fn(f) => firsts.push(source.span_of(&f.block.stmts[0])),
                syn::Item::Impl(i) => {
                    for it in &i.items {
                        if let syn::ImplItem::Fn(m) = it {
                            firsts.push(source.span_of(&m.block.stmts[0]));
                        }
                    }
                }
                _ => {}
            }
        }
        let mut restored = out.clone();
        firsts.sort_by_key(|s| std::cmp::Reverse(s.start));
        for span in firsts {
            restored.replace_range(span.start..span.end, "");
        }
        assert_eq!(restored, LIB);
    }

    #[test]
    fn zero_targets_give_an_identical_copy() {
        let dir = project();
        let model = analyze(dir.path(), &AnalysisOptions::default()).unwrap();
        let out = tempfile::tempdir().unwrap();
        let plan = InstrumentationPlan {
            targets: vec![],
            output_root: out.path().join("copy"),
            max_records_per_target: DEFAULT_MAX_RECORDS,
            skip: Vec::new(),
        };
        let copy = instrument(dir.path(), &model, &plan, false).unwrap();
        assert!(copy.files.is_empty());
        for rel in ["Cargo.toml", "src/lib.rs", "tests/t.rs"] {
            assert_eq!(
                std::fs::read(dir.path().join(rel)).unwrap(),
                std::fs::read(copy.root.join(rel)).unwrap()
            );
        }
    }

    #[test]
    fn unknown_target_and_reused_output_are_errors() {
        let dir = project();
        let model = analyze(dir.path(), &AnalysisOptions::default()).unwrap();
        let out = tempfile::tempdir().unwrap();
        let mut plan = InstrumentationPlan {
            targets: vec!["suite::nope(i32)".into()],
            output_root: out.path().join("copy"),
            max_records_per_target: 1,
            skip: Vec::new(),
        };
        assert!(matches!(instrument(dir.path(), &model, &plan, false), Err(Error::TargetNotFound(_))));
        plan.targets.clear();
        instrument(dir.path(), &model, &plan, false).unwrap();
        assert!(matches!(instrument(dir.path(), &model, &plan, false), Err(Error::WriteConflict(_))));
        plan.output_root = dir.path().to_path_buf();
        assert!(matches!(instrument(dir.path(), &model, &plan, false), Err(Error::Config(_))));
    }

    #[test]
    fn captured_records_match_invocations() {
        let dir = project();
        let model = analyze(dir.path(), &AnalysisOptions::default()).unwrap();
        let out = tempfile::tempdir().unwrap();
        let plan = InstrumentationPlan {
            targets: model.targets.iter().map(|t| t.id.clone()).collect(),
            output_root: out.path().join("copy"),
            max_records_per_target: DEFAULT_MAX_RECORDS,
            skip: Vec::new(),
        };
        let copy = instrument(dir.path(), &model, &plan, true).unwrap();
        let sink = out.path().join("capture.test.jsonl");
        let session = run_captured(&copy.root, Context::Test, "cargo test --quiet", &sink).unwrap();
        assert!(session.success, "{:?}", session.warnings);
        let kinds = model.targets.iter().map(|t| (t.id.clone(), t.kinds())).collect();
        let log = crate::capture::load(&sink, &kinds).unwrap();
        assert!(log.rejected.is_empty(), "{:?}", log.rejected);
        assert_eq!(log.records.len(), 2);
        let set = &log.records.iter().find(|r| r.target.contains("set")).unwrap();
        assert_eq!(set.tuple.values()[0].as_str(), "s:ab");
        assert_eq!(set.test_id.as_deref(), Some("t::t"));
        let scale = &log.records.iter().find(|r| r.target.contains("scale")).unwrap();
        assert_eq!(scale.tuple.key(), format!("f64:{:016x}\u{1f}nil", 1.5f64.to_bits()));
    }
}
