//! Static model of a subject project: target methods, tests, their
//! assertions and the target calls they make directly.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{ScalarKind, Tuple};

/// Half-open byte range into a source file. Serialized as `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ByteSpan {
    pub start: usize,
    pub end: usize,
}

impl ByteSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        ByteSpan { start, end }
    }

    pub fn contains(&self, other: &ByteSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &ByteSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl Serialize for ByteSpan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.start, self.end].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ByteSpan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [start, end] = <[usize; 2]>::deserialize(deserializer)?;
        if start > end {
            return Err(serde::de::Error::custom("span start after end"));
        }
        Ok(ByteSpan { start, end })
    }
}

impl fmt::Display for ByteSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A scalar parameter: its kind plus the normalized Rust type used when
/// rendering code (`&str` vs `String`, `usize` vs `u64`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamType {
    pub kind: ScalarKind,
    pub rust: String,
}

impl ParamType {
    pub fn new(kind: ScalarKind, rust: impl Into<String>) -> Self {
        ParamType {
            kind,
            rust: rust.into(),
        }
    }

    pub fn owned_text(&self) -> bool {
        self.rust == "String" || self.rust == "Option<String>"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetMethod {
    /// Qualified name plus kind signature, e.g. `codec::encode(i64)`.
    pub id: String,
    pub name: String,
    pub path: Vec<String>,
    pub params: Vec<ParamType>,
    pub param_names: Vec<String>,
    pub receiver: bool,
    pub file: String,
    pub span: ByteSpan,
    /// Offset just past the opening brace of the body.
    pub body_open: usize,
}

impl TargetMethod {
    pub fn kinds(&self) -> Vec<ScalarKind> {
        self.params.iter().map(|p| p.kind).collect()
    }

    pub fn make_id(path: &[String], params: &[ParamType]) -> String {
        let kinds: Vec<String> = params.iter().map(|p| p.kind.to_string()).collect();
        format!("{}({})", path.join("::"), kinds.join(","))
    }

    pub fn record(&self) -> TargetRecord {
        TargetRecord {
            id: self.id.clone(),
            params: self.kinds(),
            file: self.file.clone(),
            span: self.span,
        }
    }
}

/// Row of `targets.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub id: String,
    pub params: Vec<ScalarKind>,
    pub file: String,
    pub span: ByteSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub span: ByteSpan,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionSite {
    pub index: usize,
    pub span: ByteSpan,
    pub text: String,
    /// Inside a loop, conditional or inner block rather than at the top level of the body.
    pub nested: bool,
    /// A whole statement, as opposed to an assertion in expression position.
    pub statement: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetCallSite {
    pub target: String,
    pub span: ByteSpan,
    pub text: String,
    pub arg_exprs: Vec<String>,
    pub arg_spans: Vec<ByteSpan>,
    pub static_tuple: Option<Tuple>,
    /// Index of the assertion statement containing this call, if any.
    pub in_assertion: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    /// `<test crate>::<module path>::<fn>`, matching what the test harness reports.
    pub id: String,
    pub name: String,
    pub file: String,
    /// Inline modules enclosing the test inside its file.
    pub module_path: Vec<String>,
    /// True for tests under `tests/`, false for tests embedded in the library.
    pub integration: bool,
    pub span: ByteSpan,
    pub body_span: ByteSpan,
    /// Return type as written, including the arrow.
    pub output: Option<String>,
    pub should_panic: bool,
    pub ignored: bool,
    pub body: Vec<Fragment>,
    pub assertions: Vec<AssertionSite>,
    pub target_calls: Vec<TargetCallSite>,
}

impl TestCase {
    /// Distinct target ids in order of first call.
    pub fn target_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for call in &self.target_calls {
            if !ids.contains(&call.target) {
                ids.push(call.target.clone());
            }
        }
        ids
    }

    pub fn first_site(&self, target: &str) -> Option<&TargetCallSite> {
        self.target_calls.iter().find(|c| c.target == target)
    }

    pub fn summary(&self) -> TestRecord {
        TestRecord {
            id: self.id.clone(),
            file: self.file.clone(),
            span: self.span,
            assertion_count: self.assertions.len(),
            target_ids: self.target_ids(),
        }
    }
}

/// Row of `tests.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRecord {
    pub id: String,
    pub file: String,
    pub span: ByteSpan,
    pub assertion_count: usize,
    pub target_ids: Vec<String>,
}
