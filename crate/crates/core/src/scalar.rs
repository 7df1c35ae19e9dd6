//! Scalar kinds and their canonical, byte-comparable text encoding.
//!
//! Every captured argument is stored as a canonical string whose bytes fully
//! determine the value: two scalars are equal exactly when their encodings
//! are byte-equal. Floats are stored as IEEE-754 bit patterns so NaN payloads
//! and the sign of zero survive; integers as minimal decimals; text as a
//! JSON-escaped body without surrounding quotes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Marker stored in place of an argument the emitter failed to serialize.
pub const UNSERIALIZABLE: &str = "!unserializable";

/// Separator between canonical encodings inside a dedup key. Control
/// characters are always escaped in text encodings, so it cannot collide.
pub const KEY_SEPARATOR: char = '\u{1f}';

/// The closed set of argument kinds a target method may accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarKind {
    Bool,
    Int { bits: u8, signed: bool },
    F32,
    F64,
    Char,
    Text,
    NullableText,
}

impl ScalarKind {
    pub const INT_WIDTHS: [u8; 5] = [8, 16, 32, 64, 128];

    pub fn int(bits: u8, signed: bool) -> Option<Self> {
        Self::INT_WIDTHS
            .contains(&bits)
            .then_some(ScalarKind::Int { bits, signed })
    }

    /// Every kind, with each integer width in both signednesses.
    pub fn all() -> Vec<ScalarKind> {
        let mut kinds = vec![ScalarKind::Bool];
        for bits in Self::INT_WIDTHS {
            kinds.push(ScalarKind::Int { bits, signed: true });
            kinds.push(ScalarKind::Int { bits, signed: false });
        }
        kinds.extend([
            ScalarKind::F32,
            ScalarKind::F64,
            ScalarKind::Char,
            ScalarKind::Text,
            ScalarKind::NullableText,
        ]);
        kinds
    }

    fn int_tag(bits: u8, signed: bool) -> String {
        format!("{}{}", if signed { 'i' } else { 'u' }, bits)
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarKind::Bool => f.write_str("bool"),
            ScalarKind::Int { bits, signed } => f.write_str(&Self::int_tag(*bits, *signed)),
            ScalarKind::F32 => f.write_str("f32"),
            ScalarKind::F64 => f.write_str("f64"),
            ScalarKind::Char => f.write_str("char"),
            ScalarKind::Text => f.write_str("text"),
            ScalarKind::NullableText => f.write_str("text?"),
        }
    }
}

impl FromStr for ScalarKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "bool" => Some(ScalarKind::Bool),
            "f32" => Some(ScalarKind::F32),
            "f64" => Some(ScalarKind::F64),
            "char" => Some(ScalarKind::Char),
            "text" => Some(ScalarKind::Text),
            "text?" => Some(ScalarKind::NullableText),
            _ => {
                let signed = match s.as_bytes().first() {
                    Some(b'i') => Some(true),
                    Some(b'u') => Some(false),
                    _ => None,
                };
                signed.and_then(|signed| {
                    s[1..]
                        .parse::<u8>()
                        .ok()
                        .filter(|bits| s[1..] == bits.to_string())
                        .and_then(|bits| ScalarKind::int(bits, signed))
                })
            }
        };
        kind.ok_or_else(|| Error::Encoding(format!("unknown scalar kind `{s}`")))
    }
}

impl Serialize for ScalarKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScalarKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A decoded scalar value.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Bool(bool),
    Signed(i128),
    Unsigned(u128),
    F32(f32),
    F64(f64),
    Char(char),
    Text(String),
    Null,
}

impl Scalar {
    /// Bitwise identity: floats compare by bit pattern.
    pub fn bit_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::F32(a), Scalar::F32(b)) => a.to_bits() == b.to_bits(),
            (Scalar::F64(a), Scalar::F64(b)) => a.to_bits() == b.to_bits(),
            _ => self == other,
        }
    }
}

/// The canonical encoding of one scalar.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Canonical(String);

impl Canonical {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn unserializable() -> Self {
        Canonical(UNSERIALIZABLE.to_owned())
    }

    pub fn is_unserializable(&self) -> bool {
        self.0 == UNSERIALIZABLE
    }

    /// Accepts `text` only if it is the canonical encoding of some value of `kind`.
    pub fn parse(kind: ScalarKind, text: &str) -> Result<Self> {
        let candidate = Canonical(text.to_owned());
        if candidate.is_unserializable() {
            return Ok(candidate);
        }
        let value = decode(kind, &candidate)?;
        let again = canonicalize(kind, &value)?;
        if again != candidate {
            return Err(Error::Encoding(format!(
                "`{text}` is not the canonical {kind} encoding (expected `{}`)",
                again.0
            )));
        }
        Ok(candidate)
    }
}

impl fmt::Display for Canonical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered argument tuple of canonical scalars.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple(pub Vec<Canonical>);

impl Tuple {
    pub fn new(values: Vec<Canonical>) -> Self {
        Tuple(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Canonical] {
        &self.0
    }

    /// Byte concatenation of the encodings with unit separators.
    pub fn key(&self) -> String {
        let mut key = String::new();
        for (i, value) in self.0.iter().enumerate() {
            if i > 0 {
                key.push(KEY_SEPARATOR);
            }
            key.push_str(value.as_str());
        }
        key
    }

    pub fn has_unserializable(&self) -> bool {
        self.0.iter().any(Canonical::is_unserializable)
    }

    pub fn check_kinds(&self, kinds: &[ScalarKind]) -> Result<()> {
        if self.0.len() != kinds.len() {
            return Err(Error::Encoding(format!(
                "tuple has {} values, target takes {}",
                self.0.len(),
                kinds.len()
            )));
        }
        for (value, kind) in self.0.iter().zip(kinds) {
            if !value.is_unserializable() {
                Canonical::parse(*kind, value.as_str())?;
            }
        }
        Ok(())
    }
}

impl Ord for Tuple {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Tuple {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Encodes `value` as a scalar of `kind`.
pub fn canonicalize(kind: ScalarKind, value: &Scalar) -> Result<Canonical> {
    let unrepresentable =
        || Error::Encoding(format!("value {value:?} is not representable as {kind}"));
    let text = match (kind, value) {
        (ScalarKind::Bool, Scalar::Bool(b)) => b.to_string(),
        (ScalarKind::Int { bits, signed }, Scalar::Signed(v)) => {
            if !int_fits(bits, signed, *v < 0, v.unsigned_abs()) {
                return Err(unrepresentable());
            }
            format!("{}:{v}", ScalarKind::int_tag(bits, signed))
        }
        (ScalarKind::Int { bits, signed }, Scalar::Unsigned(v)) => {
            if !int_fits(bits, signed, false, *v) {
                return Err(unrepresentable());
            }
            format!("{}:{v}", ScalarKind::int_tag(bits, signed))
        }
        (ScalarKind::F32, Scalar::F32(v)) => format!("f32:{:08x}", v.to_bits()),
        (ScalarKind::F64, Scalar::F64(v)) => format!("f64:{:016x}", v.to_bits()),
        (ScalarKind::Char, Scalar::Char(c)) => format!("c:{}", escape(c.encode_utf8(&mut [0; 4]))),
        (ScalarKind::Text | ScalarKind::NullableText, Scalar::Text(s)) => {
            format!("s:{}", escape(s))
        }
        (ScalarKind::NullableText, Scalar::Null) => "nil".to_owned(),
        _ => return Err(unrepresentable()),
    };
    Ok(Canonical(text))
}

fn int_fits(bits: u8, signed: bool, negative: bool, magnitude: u128) -> bool {
    if signed {
        let limit = 1u128 << (bits - 1);
        if negative {
            magnitude <= limit
        } else {
            magnitude < limit
        }
    } else {
        !negative && (bits == 128 || magnitude < (1u128 << bits))
    }
}

/// Decodes a canonical encoding back into a value of `kind`.
pub fn decode(kind: ScalarKind, canonical: &Canonical) -> Result<Scalar> {
    let text = canonical.as_str();
    let bad = || Error::Encoding(format!("`{text}` does not decode as {kind}"));
    match kind {
        ScalarKind::Bool => match text {
            "true" => Ok(Scalar::Bool(true)),
            "false" => Ok(Scalar::Bool(false)),
            _ => Err(bad()),
        },
        ScalarKind::Int { bits, signed } => {
            let tag = ScalarKind::int_tag(bits, signed);
            let digits = text
                .strip_prefix(tag.as_str())
                .and_then(|rest| rest.strip_prefix(':'))
                .ok_or_else(bad)?;
            let (negative, magnitude) = match digits.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, digits),
            };
            let canonical_digits = !magnitude.is_empty()
                && magnitude.bytes().all(|b| b.is_ascii_digit())
                && (magnitude == "0" || !magnitude.starts_with('0'))
                && !(negative && magnitude == "0");
            if !canonical_digits {
                return Err(bad());
            }
            let magnitude: u128 = magnitude.parse().map_err(|_| bad())?;
            if !int_fits(bits, signed, negative, magnitude) {
                return Err(bad());
            }
            if signed {
                let value = if negative {
                    0i128.checked_sub_unsigned(magnitude).ok_or_else(bad)?
                } else {
                    i128::try_from(magnitude).map_err(|_| bad())?
                };
                Ok(Scalar::Signed(value))
            } else {
                Ok(Scalar::Unsigned(magnitude))
            }
        }
        ScalarKind::F32 => {
            let hex = text.strip_prefix("f32:").ok_or_else(bad)?;
            if hex.len() != 8 || !is_lower_hex(hex) {
                return Err(bad());
            }
            let bits = u32::from_str_radix(hex, 16).map_err(|_| bad())?;
            Ok(Scalar::F32(f32::from_bits(bits)))
        }
        ScalarKind::F64 => {
            let hex = text.strip_prefix("f64:").ok_or_else(bad)?;
            if hex.len() != 16 || !is_lower_hex(hex) {
                return Err(bad());
            }
            let bits = u64::from_str_radix(hex, 16).map_err(|_| bad())?;
            Ok(Scalar::F64(f64::from_bits(bits)))
        }
        ScalarKind::Char => {
            let body = text.strip_prefix("c:").ok_or_else(bad)?;
            let decoded = unescape(body).ok_or_else(bad)?;
            let mut chars = decoded.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(Scalar::Char(c)),
                _ => Err(bad()),
            }
        }
        ScalarKind::Text | ScalarKind::NullableText => {
            if kind == ScalarKind::NullableText && text == "nil" {
                return Ok(Scalar::Null);
            }
            let body = text.strip_prefix("s:").ok_or_else(bad)?;
            unescape(body).map(Scalar::Text).ok_or_else(bad)
        }
    }
}

fn is_lower_hex(s: &str) -> bool {
    s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// JSON string escaping without the surrounding quotes.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape`]; rejects every form `escape` would not produce.
pub fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let decoded = match chars.next()? {
                    '"' => '"',
                    '\\' => '\\',
                    'n' => '\n',
                    'r' => '\r',
                    't' => '\t',
                    'b' => '\u{8}',
                    'f' => '\u{c}',
                    'u' => {
                        let hex: String = chars.by_ref().take(4).collect();
                        if hex.len() != 4 || !is_lower_hex(&hex) {
                            return None;
                        }
                        let code = u32::from_str_radix(&hex, 16).ok()?;
                        let shorthand = matches!(code, 0x08 | 0x09 | 0x0a | 0x0c | 0x0d);
                        if code >= 0x20 || shorthand {
                            return None;
                        }
                        char::from_u32(code)?
                    }
                    _ => return None,
                };
                out.push(decoded);
            }
            '"' => return None,
            c if (c as u32) < 0x20 => return None,
            c => out.push(c),
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc(kind: ScalarKind, value: Scalar) -> String {
        canonicalize(kind, &value).unwrap().as_str().to_owned()
    }

    #[test]
    fn documented_encodings() {
        assert_eq!(enc(ScalarKind::Bool, Scalar::Bool(true)), "true");
        assert_eq!(enc(ScalarKind::F64, Scalar::F64(1.0)), "f64:3ff0000000000000");
        assert_eq!(enc(ScalarKind::Text, Scalar::Text("b".into())), "s:b");
        assert_eq!(enc(ScalarKind::NullableText, Scalar::Null), "nil");
        assert_eq!(enc(ScalarKind::Int { bits: 32, signed: true }, Scalar::Signed(-5)), "i32:-5");
        assert_eq!(enc(ScalarKind::Int { bits: 64, signed: false }, Scalar::Unsigned(7)), "u64:7");
        assert_eq!(enc(ScalarKind::F32, Scalar::F32(-0.0)), "f32:80000000");
        assert_eq!(enc(ScalarKind::Char, Scalar::Char('\n')), "c:\\n");
        assert_eq!(
            enc(ScalarKind::Text, Scalar::Text("a\"b\u{1}é".into())),
            "s:a\\\"b\\u0001é"
        );
    }

    #[test]
    fn signed_zero_and_nan_payloads_stay_distinct() {
        let pos = enc(ScalarKind::F64, Scalar::F64(0.0));
        let neg = enc(ScalarKind::F64, Scalar::F64(-0.0));
        assert_ne!(pos, neg);
        let nan = f64::from_bits(0x7ff8_0000_0000_0001);
        assert_eq!(enc(ScalarKind::F64, Scalar::F64(nan)), "f64:7ff8000000000001");
        assert_eq!(
            enc(ScalarKind::F64, Scalar::F64(nan)),
            enc(ScalarKind::F64, Scalar::F64(f64::from_bits(nan.to_bits())))
        );
    }

    #[test]
    fn integer_range_is_enforced() {
        let i8k = ScalarKind::Int { bits: 8, signed: true };
        assert!(canonicalize(i8k, &Scalar::Signed(-128)).is_ok());
        assert!(canonicalize(i8k, &Scalar::Signed(128)).is_err());
        let u8k = ScalarKind::Int { bits: 8, signed: false };
        assert!(canonicalize(u8k, &Scalar::Signed(-1)).is_err());
        assert!(canonicalize(u8k, &Scalar::Unsigned(255)).is_ok());
        assert!(canonicalize(u8k, &Scalar::Unsigned(256)).is_err());
        let i128k = ScalarKind::Int { bits: 128, signed: true };
        assert_eq!(enc(i128k, Scalar::Signed(i128::MIN)), format!("i128:{}", i128::MIN));
    }

    #[test]
    fn non_canonical_forms_are_rejected() {
        let i32k = ScalarKind::Int { bits: 32, signed: true };
        for bad in ["i32:007", "i32:-0", "i32:+1", "i32:", "i64:1", "i32:1 "] {
            assert!(Canonical::parse(i32k, bad).is_err(), "{bad}");
        }
        for bad in ["f64:3FF0000000000000", "f64:3ff", "s:\\/", "s:\"", "s:\\u000a"] {
            let kind = if bad.starts_with('f') { ScalarKind::F64 } else { ScalarKind::Text };
            assert!(Canonical::parse(kind, bad).is_err(), "{bad}");
        }
        assert!(Canonical::parse(ScalarKind::Text, "nil").is_err());
        assert!(Canonical::parse(ScalarKind::NullableText, "nil").is_ok());
        assert!(Canonical::parse(ScalarKind::Char, "c:ab").is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ScalarKind::all() {
            assert_eq!(kind.to_string().parse::<ScalarKind>().unwrap(), kind);
        }
        assert!("i7".parse::<ScalarKind>().is_err());
        assert!("i032".parse::<ScalarKind>().is_err());
    }

    #[test]
    fn key_separates_values() {
        let a = Tuple::new(vec![
            Canonical::parse(ScalarKind::Text, "s:a").unwrap(),
            Canonical::parse(ScalarKind::Text, "s:b").unwrap(),
        ]);
        let b = Tuple::new(vec![Canonical::parse(ScalarKind::Text, "s:a\\u001fs:b").unwrap()]);
        assert_ne!(a.key(), b.key());
    }
}
