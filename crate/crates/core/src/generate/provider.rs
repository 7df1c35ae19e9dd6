//! Argument providers: the ordered rows a parameterized test runs over.

use serde::{Deserialize, Serialize};

use crate::capture::CaptureUnion;
use crate::error::{Error, Result};
use crate::model::ParamType;
use crate::scalar::{decode, Scalar, ScalarKind, Tuple};

pub const DEFAULT_ROW_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentProvider {
    pub put_ids: Vec<String>,
    pub rows: Vec<Tuple>,
    /// Parallel to `rows`; true exactly on a prefix.
    pub original_flags: Vec<bool>,
    /// Rows dropped from the tail by the row cap.
    pub trimmed: usize,
}

impl ArgumentProvider {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn original_rows(&self) -> Vec<usize> {
        self.original_flags
            .iter()
            .enumerate()
            .filter(|(_, f)| **f)
            .map(|(i, _)| i)
            .collect()
    }

    /// The provider restricted to `rows`, in their current order.
    pub fn restrict(&self, rows: &[usize], put_ids: Vec<String>) -> ArgumentProvider {
        ArgumentProvider {
            put_ids,
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
            original_flags: rows.iter().map(|&r| self.original_flags[r]).collect(),
            trimmed: 0,
        }
    }
}

/// Orders `union` with `originals` first (in the given order) and every
/// other tuple in lexicographic order of its dedup key, then applies `cap`.
pub fn synthesize_provider(
    put_ids: Vec<String>,
    union: &CaptureUnion,
    originals: &[Tuple],
    cap: usize,
) -> Result<ArgumentProvider> {
    if union.is_empty() {
        return Err(Error::EmptyUnion(union.target.clone()));
    }
    let mut rows: Vec<Tuple> = Vec::new();
    for o in originals {
        if !rows.contains(o) {
            rows.push(o.clone());
        }
    }
    let original_count = rows.len();
    let mut rest: Vec<(String, &Tuple)> = union
        .tuples
        .iter()
        .filter(|t| !rows.contains(t))
        .map(|t| (t.key(), t))
        .collect();
    rest.sort_by(|a, b| a.0.cmp(&b.0));
    let room = cap.max(original_count) - original_count;
    let trimmed = rest.len().saturating_sub(room);
    rows.extend(rest.into_iter().take(room).map(|(_, t)| t.clone()));
    let original_flags = (0..rows.len()).map(|i| i < original_count).collect();
    Ok(ArgumentProvider {
        put_ids,
        rows,
        original_flags,
        trimmed,
    })
}

/// A Rust expression evaluating to the value of `tuple[i]` as `ty`.
pub fn render_value(value: &crate::scalar::Canonical, ty: &ParamType) -> Result<String> {
    let scalar = decode(ty.kind, value)?;
    let owned = ty.owned_text();
    Ok(match scalar {
        Scalar::Bool(b) => b.to_string(),
        Scalar::Signed(v) => format!("{v}{}", ty.rust),
        Scalar::Unsigned(v) => format!("{v}{}", ty.rust),
        Scalar::F32(v) if v.is_finite() => format!("{v:?}f32"),
        Scalar::F32(v) => format!("f32::from_bits({:#010x})", v.to_bits()),
        Scalar::F64(v) if v.is_finite() => format!("{v:?}f64"),
        Scalar::F64(v) => format!("f64::from_bits({:#018x})", v.to_bits()),
        Scalar::Char(c) => format!("{c:?}"),
        Scalar::Text(s) => {
            let lit = format!("{s:?}");
            let text = if owned { format!("String::from({lit})") } else { lit };
            if ty.kind == ScalarKind::NullableText {
                format!("Some({text})")
            } else {
                text
            }
        }
        Scalar::Null => "None".to_owned(),
    })
}

/// The Rust type a provider returns for a parameter.
pub fn provider_type(ty: &ParamType) -> String {
    match ty.rust.as_str() {
        "&str" => "&'static str".to_owned(),
        "Option<&str>" => "Option<&'static str>".to_owned(),
        other => other.to_owned(),
    }
}

pub fn render_tuple(tuple: &Tuple, params: &[ParamType]) -> Result<String> {
    let values: Vec<String> = tuple
        .values()
        .iter()
        .zip(params)
        .map(|(v, ty)| render_value(v, ty))
        .collect::<Result<_>>()?;
    Ok(if values.len() == 1 {
        format!("({},)", values[0])
    } else {
        format!("({})", values.join(", "))
    })
}
