//! Folding of literal argument expressions into canonical scalars.

use syn::{Expr, Lit, UnOp};

use crate::model::ParamType;
use crate::scalar::{canonicalize, Canonical, Scalar, ScalarKind};

/// Resolves one argument expression against its declared parameter type.
///
/// `Ok(None)` means the expression is not a literal. `Err` means it is a
/// literal that cannot be a value of the declared type.
pub fn resolve_literal(text: &str, ty: &ParamType) -> Result<Option<Canonical>, String> {
    let expr: Expr = match syn::parse_str(text) {
        Ok(expr) => expr,
        Err(_) => return Ok(None),
    };
    resolve_expr(&expr, ty)
}

fn strip(expr: &Expr) -> &Expr {
    match expr {
        Expr::Paren(p) => strip(&p.expr),
        Expr::Group(g) => strip(&g.expr),
        other => other,
    }
}

fn resolve_expr(expr: &Expr, ty: &ParamType) -> Result<Option<Canonical>, String> {
    let expr = strip(expr);
    if ty.kind == ScalarKind::NullableText {
        return resolve_nullable(expr, ty);
    }
    let (negated, lit) = match expr {
        Expr::Lit(l) => (false, &l.lit),
        Expr::Unary(u) if matches!(u.op, UnOp::Neg(_)) => match strip(&u.expr) {
            Expr::Lit(l) => (true, &l.lit),
            _ => return Ok(None),
        },
        _ => return Ok(None),
    };
    let value = literal_value(lit, negated, ty)?;
    canonicalize(ty.kind, &value).map(Some).map_err(|e| e.to_string())
}

fn resolve_nullable(expr: &Expr, ty: &ParamType) -> Result<Option<Canonical>, String> {
    match expr {
        Expr::Path(p) if last_ident(&p.path).as_deref() == Some("None") => {
            canonicalize(ty.kind, &Scalar::Null).map(Some).map_err(|e| e.to_string())
        }
        Expr::Call(call) => {
            let Expr::Path(callee) = strip(&call.func) else {
                return Ok(None);
            };
            if last_ident(&callee.path).as_deref() != Some("Some") || call.args.len() != 1 {
                return Ok(None);
            }
            match strip(&call.args[0]) {
                Expr::Lit(l) => {
                    let value = literal_value(&l.lit, false, ty)?;
                    canonicalize(ty.kind, &value).map(Some).map_err(|e| e.to_string())
                }
                _ => Ok(None),
            }
        }
        Expr::Lit(l) => Err(format!(
            "literal `{}` passed where {} is expected",
            quote_lit(&l.lit),
            ty.rust
        )),
        _ => Ok(None),
    }
}

fn last_ident(path: &syn::Path) -> Option<String> {
    path.segments.last().map(|s| s.ident.to_string())
}

fn quote_lit(lit: &Lit) -> String {
    match lit {
        Lit::Str(s) => format!("{:?}", s.value()),
        Lit::Int(i) => i.to_string(),
        Lit::Float(f) => f.to_string(),
        Lit::Bool(b) => b.value.to_string(),
        Lit::Char(c) => format!("{:?}", c.value()),
        _ => "<literal>".to_owned(),
    }
}

fn literal_value(lit: &Lit, negated: bool, ty: &ParamType) -> Result<Scalar, String> {
    let mismatch = || {
        format!(
            "literal `{}{}` does not fit declared type {}",
            if negated { "-" } else { "" },
            quote_lit(lit),
            ty.rust
        )
    };
    let check_suffix = |suffix: &str| {
        if suffix.is_empty() || suffix == ty.rust {
            Ok(())
        } else {
            Err(mismatch())
        }
    };
    match (ty.kind, lit) {
        (ScalarKind::Bool, Lit::Bool(b)) if !negated => Ok(Scalar::Bool(b.value)),
        (ScalarKind::Int { signed, .. }, Lit::Int(i)) => {
            check_suffix(i.suffix())?;
            let magnitude: u128 = i.base10_digits().parse().map_err(|_| mismatch())?;
            if negated {
                if !signed {
                    return Err(mismatch());
                }
                0i128
                    .checked_sub_unsigned(magnitude)
                    .map(Scalar::Signed)
                    .ok_or_else(mismatch)
            } else if signed {
                i128::try_from(magnitude)
                    .map(Scalar::Signed)
                    .map_err(|_| mismatch())
            } else {
                Ok(Scalar::Unsigned(magnitude))
            }
        }
        (ScalarKind::F32 | ScalarKind::F64, Lit::Float(_) | Lit::Int(_)) => {
            let (digits, suffix) = match lit {
                Lit::Float(f) => (f.base10_digits(), f.suffix()),
                Lit::Int(i) => (i.base10_digits(), i.suffix()),
                _ => unreachable!(),
            };
            if matches!(lit, Lit::Int(_)) && suffix.is_empty() {
                return Err(mismatch());
            }
            check_suffix(suffix)?;
            if ty.kind == ScalarKind::F32 {
                let v: f32 = digits.parse().map_err(|_| mismatch())?;
                Ok(Scalar::F32(if negated { -v } else { v }))
            } else {
                let v: f64 = digits.parse().map_err(|_| mismatch())?;
                Ok(Scalar::F64(if negated { -v } else { v }))
            }
        }
        (ScalarKind::Char, Lit::Char(c)) if !negated => Ok(Scalar::Char(c.value())),
        (ScalarKind::Text | ScalarKind::NullableText, Lit::Str(s)) if !negated => {
            Ok(Scalar::Text(s.value()))
        }
        _ => Err(mismatch()),
    }
}
