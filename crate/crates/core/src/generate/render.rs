//! Rendering of generated test units for the libtest adapter.

use std::collections::BTreeMap;
use std::path::Path;

use crate::analysis::SourceFile;
use crate::error::{Error, Result};
use crate::generate::provider::{provider_type, render_tuple, ArgumentProvider};
use crate::generate::PutSpec;
use crate::model::{ByteSpan, TestCase};

/// The only registered adapter: plain `#[test]` functions, one per row.
pub const LIBTEST_ADAPTER: &str = "rust-libtest";

pub fn check_adapter(adapter: &str) -> Result<()> {
    if adapter == LIBTEST_ADAPTER {
        Ok(())
    } else {
        Err(Error::UnknownAdapter(adapter.to_owned()))
    }
}

const PRELUDE: &str = "// Generated by putforge. Each `__row_NNNN` test runs one parameterized test\n// on one provider row.\n#![allow(dead_code, unused_imports, unused_variables, unused_mut, unused_assignments, non_snake_case, clippy::all)]\n\n";

/// A provider and the PUTs that draw their arguments from it.
#[derive(Debug, Clone)]
pub struct ProviderGroup<'a> {
    pub function: String,
    pub provider: &'a ArgumentProvider,
    pub puts: Vec<&'a PutSpec>,
}

/// Everything needed to turn one CUT's file into a generated unit.
#[derive(Debug, Clone)]
pub struct UnitSource<'a> {
    pub cut: &'a TestCase,
    /// Bytes of the CUT's file.
    pub file_text: &'a str,
    /// Every test function of that file; all are left out of the unit.
    pub test_spans: Vec<ByteSpan>,
    /// Path of the generated file relative to the project root.
    pub unit_file: &'a str,
    pub groups: Vec<ProviderGroup<'a>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedUnit {
    pub text: String,
    /// Libtest names of the row tests, per PUT id, in row order.
    pub row_tests: BTreeMap<String, Vec<String>>,
}

pub fn row_test_name(put: &str, row: usize, rows: usize) -> String {
    let width = rows.saturating_sub(1).to_string().len().max(4);
    format!("{put}__row_{row:0width$}")
}

/// Relative path from the directory of `from` to `to`, both project-relative.
fn relative(from: &str, to: &str) -> String {
    let depth = from.matches('/').count();
    format!("{}{}", "../".repeat(depth), to)
}

/// `#[path]` attributes for `mod x;` declarations so they still resolve
/// once the file moves to `unit_file`.
fn mod_path_edits(source: &SourceFile, root: Option<&Path>, unit_file: &str) -> Result<Vec<(ByteSpan, String)>> {
    let file = source.parse()?;
    let dir = source.rel.rsplit_once('/').map(|(d, _)| d).unwrap_or("");
    let mut edits = Vec::new();
    for item in &file.items {
        let syn::Item::Mod(m) = item else { continue };
        if m.content.is_some() || m.attrs.iter().any(|a| a.path().is_ident("path")) {
            continue;
        }
        let name = m.ident.to_string();
        let join = |p: String| if dir.is_empty() { p } else { format!("{dir}/{p}") };
        let flat = join(format!("{name}.rs"));
        let nested = join(format!("{name}/mod.rs"));
        let target = match root {
            Some(root) if !root.join(&flat).is_file() && root.join(&nested).is_file() => nested,
            _ => flat,
        };
        let at = source.span_of(item).start;
        edits.push((
            ByteSpan::new(at, at),
            format!("#[path = \"{}\"]\n", relative(unit_file, &target)),
        ));
    }
    Ok(edits)
}

fn indent_of(text: &str, at: usize) -> &str {
    let line_start = text[..at].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let line = &text[line_start..at];
    &line[..line.len() - line.trim_start().len()]
}

fn render_group(group: &ProviderGroup<'_>, module: &[String], rows: &mut BTreeMap<String, Vec<String>>) -> Result<String> {
    let Some(first) = group.puts.first() else {
        return Ok(String::new());
    };
    let params = &first.params;
    let types: Vec<String> = params.iter().map(provider_type).collect();
    let tuple_type = if types.len() == 1 {
        format!("({},)", types[0])
    } else {
        format!("({})", types.join(", "))
    };
    let mut out = String::new();
    for put in &group.puts {
        out.push_str(&put.source());
        out.push_str("\n\n");
    }
    out.push_str(&format!("fn {}(row: usize) -> {tuple_type} {{\n    match row {{\n", group.function));
    for (i, row) in group.provider.rows.iter().enumerate() {
        out.push_str(&format!("        {i} => {},\n", render_tuple(row, params)?));
    }
    out.push_str("        _ => unreachable!(\"row {row} is outside the provider\"),\n    }\n}\n");
    let n = group.provider.len();
    for put in &group.puts {
        let names = &put.param_names;
        let pattern = if names.len() == 1 {
            format!("({},)", names[0])
        } else {
            format!("({})", names.join(", "))
        };
        let output = put.output.as_deref().map(|o| format!(" {o}")).unwrap_or_default();
        let attrs = if put.should_panic { "#[test]\n#[should_panic]\n" } else { "#[test]\n" };
        let mut libtest = Vec::with_capacity(n);
        for row in 0..n {
            let name = row_test_name(&put.name, row, n);
            out.push_str(&format!(
                "\n{attrs}fn {name}(){output} {{\n    let {pattern} = {}({row});\n    {}({})\n}}\n",
                group.function,
                put.name,
                names.join(", ")
            ));
            let mut path = module.to_vec();
            path.push(name);
            libtest.push(path.join("::"));
        }
        rows.insert(put.id.clone(), libtest);
    }
    Ok(out)
}

/// Renders one generated unit: the CUT's file with its tests removed and
/// the CUT replaced by the PUTs, their providers and one test per row.
/// `root` is used to resolve `mod x;` declarations of the CUT's file.
pub fn render_unit(adapter: &str, unit: &UnitSource<'_>, root: Option<&Path>) -> Result<RenderedUnit> {
    check_adapter(adapter)?;
    let text = unit.file_text;
    let source = SourceFile::new(unit.cut.file.clone(), text.to_owned());
    let mut rows = BTreeMap::new();
    let mut generated = String::new();
    for group in &unit.groups {
        generated.push_str(&render_group(group, &unit.cut.module_path, &mut rows)?);
    }
    let indent = indent_of(text, unit.cut.span.start);
    let generated = generated.trim_end().replace('\n', &format!("\n{indent}")).replace(&format!("\n{indent}\n"), "\n\n");

    let mut edits = mod_path_edits(&source, root, unit.unit_file)?;
    for span in &unit.test_spans {
        let replacement = if *span == unit.cut.span { generated.clone() } else { String::new() };
        edits.push((*span, replacement));
    }
    edits.sort_by(|a, b| b.0.start.cmp(&a.0.start).then(b.0.end.cmp(&a.0.end)));
    let mut body = text.to_owned();
    for (span, replacement) in edits {
        body.replace_range(span.start..span.end, &replacement);
    }
    Ok(RenderedUnit {
        text: format!("{PRELUDE}{body}"),
        row_tests: rows,
    })
}
