//! Static analysis of a subject project: which tests exist, what they
//! assert, and which eligible target methods they call directly.

pub mod discover;
pub mod index;
pub mod literal;
pub mod source;

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{TargetCallSite, TargetMethod, TestCase};
use crate::scalar::Tuple;

pub use discover::{CallExpr, DiscoveredTest};
pub use index::{Callable, Callee, Ineligible, ProjectIndex};
pub use source::SourceFile;

/// Assertion macros and functions recognized by the libtest adapter.
pub const DEFAULT_ASSERTIONS: &[&str] = &[
    "assert",
    "assert_eq",
    "assert_ne",
    "debug_assert",
    "debug_assert_eq",
    "debug_assert_ne",
];

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub allow_list: Vec<String>,
    /// Project-relative paths (or `dir/`, `prefix*`) never read.
    pub exclude: Vec<String>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            allow_list: DEFAULT_ASSERTIONS.iter().map(|s| s.to_string()).collect(),
            exclude: Vec::new(),
        }
    }
}

/// Counts of what the analysis saw and skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub files: usize,
    pub tests: usize,
    pub assertions: usize,
    pub nested_assertions: usize,
    pub eligible_calls: usize,
    pub unresolved_calls: usize,
    pub ambiguous_calls: usize,
    pub no_param_calls: usize,
    pub non_scalar_calls: usize,
    pub const_fn_calls: usize,
}

impl AnalysisReport {
    fn count(&mut self, reason: Ineligible) {
        match reason {
            Ineligible::Unresolved => self.unresolved_calls += 1,
            Ineligible::Ambiguous => self.ambiguous_calls += 1,
            Ineligible::NoParams => self.no_param_calls += 1,
            Ineligible::NonScalar => self.non_scalar_calls += 1,
            Ineligible::ConstFn => self.const_fn_calls += 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectModel {
    pub crate_name: String,
    pub index: ProjectIndex,
    /// Eligible callables invoked directly by at least one test.
    pub targets: Vec<TargetMethod>,
    pub tests: Vec<TestCase>,
    pub report: AnalysisReport,
}

impl ProjectModel {
    pub fn target(&self, id: &str) -> Option<&TargetMethod> {
        self.targets.iter().find(|t| t.id == id)
    }

    pub fn test(&self, id: &str) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.id == id)
    }
}

struct Manifest {
    crate_name: String,
    lib_path: Option<String>,
}

fn read_manifest(root: &Path) -> Result<Manifest> {
    let fallback_name = root
        .file_name()
        .map(|n| n.to_string_lossy().replace('-', "_"))
        .unwrap_or_else(|| "subject".to_owned());
    let path = root.join("Cargo.toml");
    if !path.is_file() {
        return Ok(Manifest {
            crate_name: fallback_name,
            lib_path: None,
        });
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        file: path.clone(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    let lib = table.get("lib").and_then(|v| v.as_table());
    let package_name = table
        .get("package")
        .and_then(|p| p.get("name"))
        .and_then(|n| n.as_str());
    let crate_name = lib
        .and_then(|l| l.get("name"))
        .and_then(|n| n.as_str())
        .or(package_name)
        .map(|n| n.replace('-', "_"))
        .unwrap_or(fallback_name);
    let lib_path = lib
        .and_then(|l| l.get("path"))
        .and_then(|p| p.as_str())
        .map(str::to_owned);
    Ok(Manifest {
        crate_name,
        lib_path,
    })
}

/// Integration test crate roots, sorted.
fn integration_roots(root: &Path) -> Result<Vec<String>> {
    let dir = root.join("tests");
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut roots = Vec::new();
    for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
        let entry = entry.map_err(|e| Error::io(&dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".rs") && entry.path().is_file() {
            roots.push(format!("tests/{name}"));
        }
    }
    roots.sort();
    Ok(roots)
}

fn discover_all(
    root: &Path,
    options: &AnalysisOptions,
) -> Result<(String, ProjectIndex, Vec<DiscoveredTest>, usize)> {
    if !root.is_dir() {
        return Err(Error::Config(format!(
            "project root {} is not a directory",
            root.display()
        )));
    }
    let manifest = read_manifest(root)?;
    let mut tests = Vec::new();
    let mut files = 0;

    let lib_root = manifest
        .lib_path
        .clone()
        .unwrap_or_else(|| "src/lib.rs".to_owned());
    let mut index = ProjectIndex {
        crate_name: manifest.crate_name.clone(),
        callables: Vec::new(),
    };
    if root.join(&lib_root).is_file() {
        let mut walk = discover::CrateWalk {
            root,
            exclude: &options.exclude,
            allow_list: &options.allow_list,
            index_callables: true,
            test_crate: manifest.crate_name.clone(),
            integration: false,
            callables: Vec::new(),
            tests: Vec::new(),
            files: Vec::new(),
        };
        walk.walk(&lib_root, &manifest.crate_name)?;
        index.callables = walk.callables;
        tests.extend(walk.tests);
        files += walk.files.len();
    }

    for test_root in integration_roots(root)? {
        let stem = test_root
            .trim_start_matches("tests/")
            .trim_end_matches(".rs")
            .replace('-', "_");
        let mut walk = discover::CrateWalk {
            root,
            exclude: &options.exclude,
            allow_list: &options.allow_list,
            index_callables: false,
            test_crate: stem.clone(),
            integration: true,
            callables: Vec::new(),
            tests: Vec::new(),
            files: Vec::new(),
        };
        walk.walk(&test_root, &stem)?;
        tests.extend(walk.tests);
        files += walk.files.len();
    }

    tests.sort_by(|a, b| {
        (a.case.file.as_str(), a.case.span.start).cmp(&(b.case.file.as_str(), b.case.span.start))
    });
    Ok((manifest.crate_name, index, tests, files))
}

/// Recovers the original argument tuple of a call site when every argument
/// is a literal of the declared kind.
pub fn resolve_original_arguments(
    site_label: &str,
    args: &[String],
    target: &TargetMethod,
) -> Result<Option<Tuple>> {
    let mut values = Vec::with_capacity(args.len());
    for (arg, ty) in args.iter().zip(&target.params) {
        match literal::resolve_literal(arg, ty) {
            Ok(Some(value)) => values.push(value),
            Ok(None) => return Ok(None),
            Err(message) => {
                return Err(Error::Literal {
                    site: site_label.to_owned(),
                    message,
                })
            }
        }
    }
    Ok(Some(Tuple::new(values)))
}

/// Keeps the direct calls of `test` that resolve to eligible project callables.
pub fn select_target_calls(
    test: &DiscoveredTest,
    index: &ProjectIndex,
    report: &mut AnalysisReport,
) -> Result<Vec<TargetCallSite>> {
    let mut sites = Vec::new();
    for call in &test.calls {
        let callable = match index.resolve(&call.callee, &call.args) {
            Ok(c) => c,
            Err(reason) => {
                report.count(reason);
                continue;
            }
        };
        let Some(target) = callable.to_target() else {
            report.count(callable.eligibility().err().unwrap_or(Ineligible::NonScalar));
            continue;
        };
        // Path-style calls to methods pass the receiver as the first argument.
        let skip = usize::from(callable.receiver && matches!(call.callee, Callee::Path(_)));
        let args = call.args[skip..].to_vec();
        let arg_spans = call.arg_spans[skip..].to_vec();
        let label = format!("{} ({}:{})", test.case.id, test.case.file, call.span);
        let static_tuple = resolve_original_arguments(&label, &args, &target)?;
        report.eligible_calls += 1;
        sites.push(TargetCallSite {
            target: target.id,
            span: call.span,
            text: call.text.clone(),
            arg_exprs: args,
            arg_spans,
            static_tuple,
            in_assertion: call.in_assertion,
        });
    }
    Ok(sites)
}

/// Every test function of the project with assertions and target calls.
pub fn discover_tests(root: &Path, options: &AnalysisOptions) -> Result<Vec<TestCase>> {
    Ok(analyze(root, options)?.tests)
}

pub fn analyze(root: &Path, options: &AnalysisOptions) -> Result<ProjectModel> {
    let (crate_name, index, discovered, files) = discover_all(root, options)?;
    let mut report = AnalysisReport {
        files,
        ..AnalysisReport::default()
    };
    let mut tests = Vec::with_capacity(discovered.len());
    let mut used: BTreeSet<String> = BTreeSet::new();
    for test in &discovered {
        let sites = select_target_calls(test, &index, &mut report)?;
        used.extend(sites.iter().map(|s| s.target.clone()));
        let mut case = test.case.clone();
        case.target_calls = sites;
        report.assertions += case.assertions.len();
        report.nested_assertions += case.assertions.iter().filter(|a| a.nested).count();
        tests.push(case);
    }
    report.tests = tests.len();

    let mut targets: Vec<TargetMethod> = index
        .callables
        .iter()
        .filter_map(Callable::to_target)
        .filter(|t| used.contains(&t.id))
        .collect();
    targets.sort_by(|a, b| (a.file.as_str(), a.span.start).cmp(&(b.file.as_str(), b.span.start)));
    targets.dedup_by(|a, b| a.id == b.id);

    Ok(ProjectModel {
        crate_name,
        index,
        targets,
        tests,
        report,
    })
}
