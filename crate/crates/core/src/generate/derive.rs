//! Plans and derivations of parameterized tests from one CUT.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::capture::CaptureUnion;
use crate::model::{ByteSpan, ParamType, TargetCallSite, TargetMethod, TestCase};
use crate::scalar::Tuple;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PutGenerationPlan {
    pub cut: String,
    /// Qualifying targets in order of first call.
    pub targets: Vec<String>,
    pub alpha: usize,
    pub beta: usize,
    pub expected_put_count: usize,
    /// Targets left out, with the reason.
    pub skipped: Vec<(String, String)>,
}

/// Decides which targets of `cut` get parameterized: those whose union is
/// strictly larger than the CUT's own original tuples.
pub fn plan(
    cut: &TestCase,
    unions: &BTreeMap<String, CaptureUnion>,
    originals: &BTreeMap<String, Vec<Tuple>>,
) -> PutGenerationPlan {
    let mut targets = Vec::new();
    let mut skipped = Vec::new();
    for target in cut.target_ids() {
        let own = originals.get(&target).map(Vec::len).unwrap_or(0);
        let size = unions.get(&target).map(CaptureUnion::len).unwrap_or(0);
        if own == 0 {
            skipped.push((target, "no original argument was recorded".to_owned()));
        } else if size <= own {
            skipped.push((target, format!("union of {size} adds nothing to {own} original(s)")));
        } else {
            targets.push(target);
        }
    }
    let alpha = targets.len();
    let beta = cut.assertions.len();
    PutGenerationPlan {
        cut: cut.id.clone(),
        targets,
        alpha,
        beta,
        expected_put_count: alpha * beta,
        skipped,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PutSpec {
    /// `<cut id>_PUT_<target short name>_<assertion index>`.
    pub id: String,
    /// Function name in the generated unit.
    pub name: String,
    pub source_cut: String,
    pub target: String,
    /// Target name as used in PUT names.
    pub short: String,
    /// Suffix distinguishing per-site variants; empty for the first site.
    pub variant: String,
    pub site: TargetCallSite,
    /// Kept assertions; one for derived PUTs, several after merging.
    pub kept_assertions: Vec<usize>,
    pub params: Vec<ParamType>,
    pub param_names: Vec<String>,
    /// Return type of the CUT, arrow included.
    pub output: Option<String>,
    pub should_panic: bool,
    /// The derived body, braces included.
    pub block: String,
    /// Set when the parameterized call sits inside a deleted assertion.
    pub ill_formed_by_construction: Option<String>,
}

impl PutSpec {
    pub fn signature(&self) -> String {
        let params: Vec<String> = self
            .param_names
            .iter()
            .zip(&self.params)
            .map(|(n, t)| format!("{n}: {}", t.rust))
            .collect();
        let output = self.output.as_deref().map(|o| format!(" {o}")).unwrap_or_default();
        format!("fn {}({}){}", self.name, params.join(", "), output)
    }

    pub fn source(&self) -> String {
        format!("{} {}", self.signature(), self.block)
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// True when `ident` appears in `text` as a whole identifier.
pub fn mentions_ident(text: &str, ident: &str) -> bool {
    text.match_indices(ident).any(|(i, _)| {
        let before = text[..i].chars().next_back();
        let after = text[i + ident.len()..].chars().next();
        !before.is_some_and(is_ident_char) && !after.is_some_and(is_ident_char)
    })
}

/// Parameter names `p1..pk`, prefixed when the CUT already uses them.
pub fn param_names(arity: usize, body: &str) -> Vec<String> {
    let plain: Vec<String> = (1..=arity).map(|i| format!("p{i}")).collect();
    if plain.iter().any(|p| mentions_ident(body, p)) {
        (1..=arity).map(|i| format!("put_arg_{i}")).collect()
    } else {
        plain
    }
}

/// Span of a deleted statement, widened to its whole line when nothing
/// else shares the line.
fn deletion_span(file: &str, span: ByteSpan) -> ByteSpan {
    let line_start = file[..span.start].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let line_end = file[span.end..].find('\n').map(|i| span.end + i);
    let alone = file[line_start..span.start].trim().is_empty()
        && line_end.is_some_and(|e| file[span.end..e].trim().is_empty());
    match line_end {
        Some(end) if alone => ByteSpan::new(line_start, end + 1),
        _ => span,
    }
}

/// Builds the body of a PUT from `cut` (whose file text is `file`): every
/// assertion not in `kept` is removed and the arguments of `site` become
/// the PUT parameters.
pub fn derive_put(
    cut: &TestCase,
    file: &str,
    target: &TargetMethod,
    site: &TargetCallSite,
    kept: &[usize],
    name: String,
    id: String,
) -> PutSpec {
    let body = cut.body_span;
    let block_text = body.slice(file);
    let names = param_names(target.params.len(), block_text);
    let mut edits: Vec<(ByteSpan, String)> = Vec::new();
    let mut ill_formed = None;
    for assertion in &cut.assertions {
        if kept.contains(&assertion.index) {
            continue;
        }
        if assertion.span.contains(&site.span) {
            ill_formed = Some(format!(
                "the call `{}` is part of assertion {}, which this PUT deletes",
                site.text, assertion.index
            ));
        }
        if assertion.statement {
            edits.push((deletion_span(file, assertion.span), String::new()));
        } else {
            edits.push((assertion.span, "()".to_owned()));
        }
    }
    if ill_formed.is_none() {
        for (span, name) in site.arg_spans.iter().zip(&names) {
            edits.push((*span, name.clone()));
        }
    }
    edits.sort_by_key(|e| std::cmp::Reverse(e.0.start));
    let mut block = block_text.to_owned();
    for (span, replacement) in edits {
        block.replace_range(span.start - body.start..span.end - body.start, &replacement);
    }
    PutSpec {
        id,
        name,
        source_cut: cut.id.clone(),
        target: target.id.clone(),
        short: target.name.clone(),
        variant: String::new(),
        site: site.clone(),
        kept_assertions: kept.to_vec(),
        params: target.params.clone(),
        param_names: names,
        output: cut.output.clone(),
        should_panic: cut.should_panic,
        block,
        ill_formed_by_construction: ill_formed,
    }
}
