use std::path::{Path, PathBuf};

use proc_macro2::LineColumn;
use syn::spanned::Spanned;

use crate::error::{Error, Result};
use crate::model::ByteSpan;

/// A source file of the subject project with a line index for span mapping.
#[derive(Debug, Clone)]
pub struct SourceFile {
    /// Path relative to the project root, `/`-separated.
    pub rel: String,
    pub text: String,
    line_starts: Vec<usize>,
}

impl SourceFile {
    pub fn new(rel: impl Into<String>, text: String) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        SourceFile {
            rel: rel.into(),
            text,
            line_starts,
        }
    }

    pub fn load(root: &Path, rel: &str) -> Result<Self> {
        let path = root.join(rel);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(SourceFile::new(rel, text))
    }

    pub fn path(&self) -> PathBuf {
        PathBuf::from(&self.rel)
    }

    pub fn parse(&self) -> Result<syn::File> {
        syn::parse_file(&self.text).map_err(|e| {
            let start = e.span().start();
            Error::Parse {
                file: self.path(),
                line: start.line,
                column: start.column + 1,
                message: e.to_string(),
            }
        })
    }

    /// Byte offset of a line/column position (columns count characters).
    pub fn offset(&self, at: LineColumn) -> usize {
        let line = at.line.saturating_sub(1).min(self.line_starts.len() - 1);
        let start = self.line_starts[line];
        let rest = &self.text[start..];
        rest.char_indices()
            .nth(at.column)
            .map(|(i, _)| start + i)
            .unwrap_or(self.text.len())
    }

    pub fn span_of<T: Spanned + ?Sized>(&self, node: &T) -> ByteSpan {
        let span = node.span();
        ByteSpan::new(self.offset(span.start()), self.offset(span.end()))
    }

    pub fn slice(&self, span: ByteSpan) -> &str {
        span.slice(&self.text)
    }

    pub fn text_of<T: Spanned + ?Sized>(&self, node: &T) -> String {
        self.slice(self.span_of(node)).to_owned()
    }

    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let column = self.text[self.line_starts[line]..offset].chars().count();
        (line + 1, column + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_map_to_exact_bytes_with_multibyte_text() {
        let src = SourceFile::new("x.rs", "fn f() {\n    let s = \"é漢\"; g(s, 1);\n}\n".to_owned());
        let file = src.parse().unwrap();
        let syn::Item::Fn(f) = &file.items[0] else { panic!() };
        let stmt = &f.block.stmts[1];
        assert_eq!(src.text_of(stmt), "g(s, 1);");
        let first = &f.block.stmts[0];
        assert_eq!(src.text_of(first), "let s = \"é漢\";");
        assert_eq!(src.line_col(src.span_of(stmt).start), (2, 19));
    }

    #[test]
    fn parse_errors_carry_position() {
        let src = SourceFile::new("bad.rs", "fn f() {\n  let = ;\n}\n".to_owned());
        match src.parse() {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
