//! Index of callables declared in the subject library and name-based
//! resolution of call expressions against it.

use syn::{FnArg, GenericArgument, Pat, PathArguments, ReturnType, Type};

use crate::analysis::literal::resolve_literal;
use crate::model::{ByteSpan, ParamType, TargetMethod};
use crate::scalar::ScalarKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Callable {
    /// `[crate, modules.., Type?, name]`
    pub path: Vec<String>,
    pub name: String,
    pub self_ty: Option<String>,
    pub receiver: bool,
    /// `None` for parameters whose type is not a capturable scalar.
    pub params: Vec<Option<ParamType>>,
    /// `None` for parameters bound by a pattern other than a plain identifier.
    pub param_names: Vec<Option<String>>,
    pub is_const: bool,
    pub has_output: bool,
    pub file: String,
    pub span: ByteSpan,
    pub body_open: usize,
}

/// Why a call was not selected as a target call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ineligible {
    Unresolved,
    Ambiguous,
    NoParams,
    NonScalar,
    ConstFn,
}

impl Callable {
    pub fn eligibility(&self) -> Result<(), Ineligible> {
        if self.params.is_empty() {
            return Err(Ineligible::NoParams);
        }
        if self.params.iter().any(Option::is_none) || self.param_names.iter().any(Option::is_none)
        {
            return Err(Ineligible::NonScalar);
        }
        if self.is_const {
            return Err(Ineligible::ConstFn);
        }
        Ok(())
    }

    pub fn id(&self) -> Option<String> {
        let params: Option<Vec<ParamType>> = self.params.iter().cloned().collect();
        params.map(|p| TargetMethod::make_id(&self.path, &p))
    }

    pub fn to_target(&self) -> Option<TargetMethod> {
        self.eligibility().ok()?;
        let params: Vec<ParamType> = self.params.iter().cloned().collect::<Option<_>>()?;
        let param_names: Vec<String> = self.param_names.iter().cloned().collect::<Option<_>>()?;
        Some(TargetMethod {
            id: TargetMethod::make_id(&self.path, &params),
            name: self.name.clone(),
            path: self.path.clone(),
            params,
            param_names,
            receiver: self.receiver,
            file: self.file.clone(),
            span: self.span,
            body_open: self.body_open,
        })
    }
}

/// How a call expression names its callee.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Callee {
    Path(Vec<String>),
    Method(String),
}

#[derive(Debug, Clone, Default)]
pub struct ProjectIndex {
    pub crate_name: String,
    pub callables: Vec<Callable>,
}

impl ProjectIndex {
    /// Resolves a call by name, path suffix and arity. Literal arguments are
    /// used to break ties between otherwise matching candidates.
    pub fn resolve(&self, callee: &Callee, args: &[String]) -> Result<&Callable, Ineligible> {
        let candidates: Vec<&Callable> = match callee {
            Callee::Method(name) => self
                .callables
                .iter()
                .filter(|c| c.receiver && &c.name == name && c.params.len() == args.len())
                .collect(),
            Callee::Path(segments) => {
                let segments = self.strip_path_prefix(segments);
                let Some((last, _)) = segments.split_last() else {
                    return Err(Ineligible::Unresolved);
                };
                self.callables
                    .iter()
                    .filter(|c| &c.name == last)
                    .filter(|c| {
                        if segments.len() == 1 {
                            c.self_ty.is_none()
                        } else {
                            c.path[1..].ends_with(segments)
                        }
                    })
                    .filter(|c| c.params.len() + usize::from(c.receiver) == args.len())
                    .collect()
            }
        };
        match candidates.len() {
            0 => Err(Ineligible::Unresolved),
            1 => Ok(candidates[0]),
            _ => {
                let compatible: Vec<&Callable> = candidates
                    .into_iter()
                    .filter(|c| literals_compatible(c, callee, args))
                    .collect();
                match compatible.as_slice() {
                    [only] => Ok(only),
                    _ => Err(Ineligible::Ambiguous),
                }
            }
        }
    }

    fn strip_path_prefix<'a>(&self, segments: &'a [String]) -> &'a [String] {
        let mut rest = segments;
        while let Some((first, tail)) = rest.split_first() {
            let skip = matches!(first.as_str(), "crate" | "self" | "super" | "$crate")
                || *first == self.crate_name;
            if skip && !tail.is_empty() {
                rest = tail;
            } else {
                break;
            }
        }
        rest
    }
}

fn literals_compatible(callable: &Callable, callee: &Callee, args: &[String]) -> bool {
    let skip = usize::from(callable.receiver && matches!(callee, Callee::Path(_)));
    callable
        .params
        .iter()
        .zip(&args[skip..])
        .all(|(param, arg)| match param {
            Some(ty) => resolve_literal(arg, ty).is_ok(),
            None => true,
        })
}

/// Maps a declared parameter type to a scalar parameter, if it is one.
pub fn scalar_param(ty: &Type) -> Option<ParamType> {
    match ty {
        Type::Paren(p) => scalar_param(&p.elem),
        Type::Group(g) => scalar_param(&g.elem),
        Type::Reference(r) if r.mutability.is_none() => {
            is_plain_ident(&r.elem, "str").then(|| ParamType::new(ScalarKind::Text, "&str"))
        }
        Type::Path(tp) if tp.qself.is_none() => {
            let last = tp.path.segments.last()?;
            let name = last.ident.to_string();
            if name == "Option" {
                let PathArguments::AngleBracketed(args) = &last.arguments else {
                    return None;
                };
                let [GenericArgument::Type(inner)] = args.args.iter().collect::<Vec<_>>()[..]
                else {
                    return None;
                };
                let inner = scalar_param(inner)?;
                return (inner.kind == ScalarKind::Text)
                    .then(|| ParamType::new(ScalarKind::NullableText, format!("Option<{}>", inner.rust)));
            }
            if !last.arguments.is_none() {
                return None;
            }
            let kind = match name.as_str() {
                "bool" => ScalarKind::Bool,
                "f32" => ScalarKind::F32,
                "f64" => ScalarKind::F64,
                "char" => ScalarKind::Char,
                "String" => ScalarKind::Text,
                "isize" => ScalarKind::Int { bits: 64, signed: true },
                "usize" => ScalarKind::Int { bits: 64, signed: false },
                other => int_kind(other)?,
            };
            Some(ParamType::new(kind, name))
        }
        _ => None,
    }
}

fn int_kind(name: &str) -> Option<ScalarKind> {
    let signed = match name.as_bytes().first()? {
        b'i' => true,
        b'u' => false,
        _ => return None,
    };
    let bits: u8 = name[1..].parse().ok()?;
    if name[1..] != bits.to_string() {
        return None;
    }
    ScalarKind::int(bits, signed)
}

fn is_plain_ident(ty: &Type, ident: &str) -> bool {
    match ty {
        Type::Path(tp) => tp.qself.is_none() && tp.path.is_ident(ident),
        _ => false,
    }
}

/// Parameter types and names of a signature, excluding the receiver.
pub(crate) fn signature_params(
    sig: &syn::Signature,
) -> (bool, Vec<Option<ParamType>>, Vec<Option<String>>) {
    let mut receiver = false;
    let mut params = Vec::new();
    let mut names = Vec::new();
    for input in &sig.inputs {
        match input {
            FnArg::Receiver(_) => receiver = true,
            FnArg::Typed(pt) => {
                params.push(scalar_param(&pt.ty));
                names.push(match &*pt.pat {
                    Pat::Ident(pi) if pi.by_ref.is_none() && pi.subpat.is_none() => {
                        Some(pi.ident.to_string())
                    }
                    _ => None,
                });
            }
        }
    }
    (receiver, params, names)
}

pub(crate) fn has_output(sig: &syn::Signature) -> bool {
    !matches!(sig.output, ReturnType::Default)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(src: &str) -> Option<ParamType> {
        scalar_param(&syn::parse_str::<Type>(src).unwrap())
    }

    #[test]
    fn scalar_types_are_recognized() {
        assert_eq!(param("&str").unwrap().kind, ScalarKind::Text);
        assert_eq!(param("&'a str").unwrap().rust, "&str");
        assert_eq!(param("String").unwrap().rust, "String");
        assert_eq!(param("Option<&'static str>").unwrap().rust, "Option<&str>");
        assert_eq!(param("Option<String>").unwrap().kind, ScalarKind::NullableText);
        assert_eq!(param("u16").unwrap().kind, ScalarKind::Int { bits: 16, signed: false });
        assert_eq!(param("usize").unwrap().kind, ScalarKind::Int { bits: 64, signed: false });
        assert_eq!(param("f32").unwrap().kind, ScalarKind::F32);
    }

    #[test]
    fn aggregates_and_references_are_not_scalars() {
        for src in ["&mut str", "Vec<u8>", "&[u8]", "Document", "&String", "Option<i32>", "u7", "(i32, i32)"] {
            assert!(param(src).is_none(), "{src}");
        }
    }

    fn callable(path: &[&str], receiver: bool, params: &[&str]) -> Callable {
        Callable {
            path: path.iter().map(|s| s.to_string()).collect(),
            name: path.last().unwrap().to_string(),
            self_ty: (path.len() > 2 && path[path.len() - 2].starts_with(char::is_uppercase))
                .then(|| path[path.len() - 2].to_string()),
            receiver,
            params: params.iter().map(|p| param(p)).collect(),
            param_names: params.iter().enumerate().map(|(i, _)| Some(format!("a{i}"))).collect(),
            is_const: false,
            has_output: false,
            file: "src/lib.rs".into(),
            span: ByteSpan::new(0, 0),
            body_open: 0,
        }
    }

    fn index() -> ProjectIndex {
        ProjectIndex {
            crate_name: "demo".into(),
            callables: vec![
                callable(&["demo", "encode"], false, &["i64"]),
                callable(&["demo", "Field", "set_value"], true, &["&str"]),
                callable(&["demo", "Field", "new"], false, &["&str"]),
                callable(&["demo", "Other", "new"], false, &["u8"]),
                callable(&["demo", "net", "send"], false, &["&str", "u16"]),
            ],
        }
    }

    fn path(p: &str) -> Callee {
        Callee::Path(p.split("::").map(str::to_owned).collect())
    }

    fn args(a: &[&str]) -> Vec<String> {
        a.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn resolves_free_functions_methods_and_paths() {
        let idx = index();
        assert_eq!(idx.resolve(&path("encode"), &args(&["1"])).unwrap().name, "encode");
        assert_eq!(idx.resolve(&path("demo::encode"), &args(&["1"])).unwrap().name, "encode");
        assert_eq!(idx.resolve(&path("crate::net::send"), &args(&["\"h\"", "80"])).unwrap().name, "send");
        let m = idx.resolve(&Callee::Method("set_value".into()), &args(&["\"b\""])).unwrap();
        assert_eq!(m.path.join("::"), "demo::Field::set_value");
        let ufcs = idx.resolve(&path("Field::set_value"), &args(&["&mut f", "\"b\""])).unwrap();
        assert!(ufcs.receiver);
    }

    #[test]
    fn unresolved_and_ambiguous_calls() {
        let idx = index();
        assert_eq!(idx.resolve(&path("decode"), &args(&["x"])), Err(Ineligible::Unresolved));
        assert_eq!(idx.resolve(&path("encode"), &args(&[])), Err(Ineligible::Unresolved));
        assert_eq!(idx.resolve(&path("Field::new"), &args(&["\"a\""])).unwrap().path[1], "Field");
        assert_eq!(idx.resolve(&path("new"), &args(&["x"])), Err(Ineligible::Unresolved));
    }

    #[test]
    fn literal_kinds_break_ties() {
        let mut idx = index();
        idx.callables.push(callable(&["demo", "A", "put"], true, &["&str"]));
        idx.callables.push(callable(&["demo", "B", "put"], true, &["u8"]));
        let put = Callee::Method("put".into());
        assert_eq!(idx.resolve(&put, &args(&["7"])).unwrap().path[1], "B");
        assert_eq!(idx.resolve(&put, &args(&["\"x\""])).unwrap().path[1], "A");
        assert_eq!(idx.resolve(&put, &args(&["v"])), Err(Ineligible::Ambiguous));
    }
}
