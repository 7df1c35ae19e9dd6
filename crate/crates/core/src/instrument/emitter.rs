//! Source text of the capture statement inserted at the top of each target.
//!
//! The statement is a single block expression on one line so that removing
//! it restores the original file bytes. It depends on `std` only.

use crate::model::TargetMethod;
use crate::scalar::{ScalarKind, UNSERIALIZABLE};

/// Environment variable naming the capture log.
pub const SINK_VAR: &str = "PUTFORGE_SINK";
/// Environment variable carrying the session mode (`test` or `field`).
pub const MODE_VAR: &str = "PUTFORGE_MODE";
/// Environment variable carrying the id of the running test, if known.
pub const TEST_ID_VAR: &str = "PUTFORGE_TEST_ID";

const ESCAPE_FN: &str = "fn __putforge_esc(s: &str) -> ::std::string::String { let mut o = ::std::string::String::with_capacity(s.len()); for c in s.chars() { match c { '\"' => o.push_str(\"\\\\\\\"\"), '\\\\' => o.push_str(\"\\\\\\\\\"), '\\n' => o.push_str(\"\\\\n\"), '\\r' => o.push_str(\"\\\\r\"), '\\t' => o.push_str(\"\\\\t\"), '\\u{8}' => o.push_str(\"\\\\b\"), '\\u{c}' => o.push_str(\"\\\\f\"), c if (c as u32) < 0x20 => o.push_str(&::std::format!(\"\\\\u{:04x}\", c as u32)), c => o.push(c) } } o }";

/// Expression encoding parameter `name` of `kind` to its canonical text.
fn encoder(kind: ScalarKind, name: &str) -> String {
    match kind {
        ScalarKind::Bool => format!("::std::format!(\"{{}}\", {name})"),
        ScalarKind::Int { .. } => format!("::std::format!(\"{kind}:{{}}\", {name})"),
        ScalarKind::F32 => format!("::std::format!(\"f32:{{:08x}}\", {name}.to_bits())"),
        ScalarKind::F64 => format!("::std::format!(\"f64:{{:016x}}\", {name}.to_bits())"),
        ScalarKind::Char => {
            format!("::std::format!(\"c:{{}}\", __putforge_esc({name}.encode_utf8(&mut [0u8; 4])))")
        }
        ScalarKind::Text => {
            format!("::std::format!(\"s:{{}}\", __putforge_esc(::std::convert::AsRef::<str>::as_ref(&{name})))")
        }
        ScalarKind::NullableText => format!(
            "match &{name} {{ ::std::option::Option::Some(v) => ::std::format!(\"s:{{}}\", __putforge_esc(::std::convert::AsRef::<str>::as_ref(v))), ::std::option::Option::None => ::std::string::String::from(\"nil\") }}"
        ),
    }
}

/// The capture statement for `target`, with at most `cap` records per process.
pub fn emitter(target: &TargetMethod, cap: u64) -> String {
    let args: Vec<String> = target
        .params
        .iter()
        .zip(&target.param_names)
        .map(|(p, name)| {
            format!(
                "::std::panic::catch_unwind(::std::panic::AssertUnwindSafe(|| {})).unwrap_or_else(|_| ::std::string::String::from(\"{UNSERIALIZABLE}\"))",
                encoder(p.kind, name)
            )
        })
        .collect();
    let target_id = crate::scalar::escape(&target.id).replace('\\', "\\\\").replace('"', "\\\"");
    format!(
        "{{ {ESCAPE_FN} \
static __PUTFORGE_SEQ: ::std::sync::atomic::AtomicU64 = ::std::sync::atomic::AtomicU64::new(0); \
if let ::std::option::Option::Some(__putforge_sink) = ::std::env::var_os(\"{SINK_VAR}\") {{ \
let __putforge_n = __PUTFORGE_SEQ.fetch_add(1, ::std::sync::atomic::Ordering::SeqCst); \
if __putforge_n < {cap} {{ \
let __putforge_args: [::std::string::String; {arity}] = [{args}]; \
let __putforge_field = ::std::env::var(\"{MODE_VAR}\").map(|m| m == \"field\").unwrap_or(false); \
let __putforge_id = if __putforge_field {{ ::std::option::Option::None }} else {{ ::std::env::var(\"{TEST_ID_VAR}\").ok().or_else(|| {{ \
let __putforge_thread = ::std::thread::current(); \
let __putforge_name = __putforge_thread.name().filter(|n| *n != \"main\")?; \
let __putforge_exe = ::std::env::current_exe().ok()?; \
let __putforge_stem = __putforge_exe.file_stem()?.to_str()?.to_owned(); \
let __putforge_crate = __putforge_stem.rsplit_once('-').map(|(c, _)| c.to_owned()).unwrap_or(__putforge_stem); \
::std::option::Option::Some(::std::format!(\"{{}}::{{}}\", __putforge_crate, __putforge_name)) }}) }}; \
let mut __putforge_line = ::std::string::String::from(\"{{\\\"t\\\":\\\"{target_id}\\\",\\\"a\\\":[\"); \
for (i, a) in __putforge_args.iter().enumerate() {{ if i > 0 {{ __putforge_line.push(','); }} __putforge_line.push('\"'); __putforge_line.push_str(&__putforge_esc(a)); __putforge_line.push('\"'); }} \
__putforge_line.push_str(if __putforge_field {{ \"],\\\"c\\\":\\\"field\\\",\\\"id\\\":\" }} else {{ \"],\\\"c\\\":\\\"test\\\",\\\"id\\\":\" }}); \
match &__putforge_id {{ ::std::option::Option::Some(id) => {{ __putforge_line.push('\"'); __putforge_line.push_str(&__putforge_esc(id)); __putforge_line.push('\"'); }} ::std::option::Option::None => __putforge_line.push_str(\"null\") }} \
__putforge_line.push_str(&::std::format!(\",\\\"n\\\":{{}}}}}}\\n\", __putforge_n)); \
if let ::std::result::Result::Ok(mut f) = ::std::fs::OpenOptions::new().create(true).append(true).open(&__putforge_sink) {{ \
let _ = ::std::io::Write::write_all(&mut f, __putforge_line.as_bytes()); }} }} }} }};",
        arity = target.params.len(),
        args = args.join(", "),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ByteSpan, ParamType};

    fn target(kinds: &[(&str, &str)]) -> TargetMethod {
        let params: Vec<ParamType> = kinds.iter().map(|(k, r)| ParamType::new(k.parse().unwrap(), *r)).collect();
        TargetMethod {
            id: TargetMethod::make_id(&["c".into(), "f".into()], &params),
            name: "f".into(),
            path: vec!["c".into(), "f".into()],
            param_names: (0..params.len()).map(|i| format!("x{i}")).collect(),
            params,
            receiver: false,
            file: "src/lib.rs".into(),
            span: ByteSpan::new(0, 0),
            body_open: 0,
        }
    }

    #[test]
    fn emitter_is_one_line_and_one_statement() {
        let t = target(&[("text?", "Option<&str>"), ("f64", "f64"), ("char", "char"), ("bool", "bool"), ("u8", "u8")]);
        let text = emitter(&t, 10);
        assert!(!text.contains('\n'));
        let block: syn::Block = syn::parse_str(&format!("{{{text}}}")).unwrap();
        assert_eq!(block.stmts.len(), 1);
    }
}
