//! Walks the crate module trees of a subject project, indexing library
//! callables and collecting `#[test]` functions with their assertions and
//! direct calls.

use std::path::Path;

use syn::visit::{self, Visit};
use syn::{Attribute, Expr, ImplItem, Item, ItemFn, Stmt};

use crate::analysis::index::{signature_params, Callable, Callee};
use crate::analysis::source::SourceFile;
use crate::error::Result;
use crate::model::{AssertionSite, ByteSpan, Fragment, TestCase};

/// A call expression found directly in a test body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallExpr {
    pub callee: Callee,
    pub span: ByteSpan,
    pub text: String,
    pub args: Vec<String>,
    pub arg_spans: Vec<ByteSpan>,
    pub in_assertion: Option<usize>,
}

/// A test function before its calls are resolved against the project index.
#[derive(Debug, Clone)]
pub struct DiscoveredTest {
    pub case: TestCase,
    pub calls: Vec<CallExpr>,
}

pub(crate) struct CrateWalk<'a> {
    pub root: &'a Path,
    pub exclude: &'a [String],
    pub allow_list: &'a [String],
    /// Index callables (library crate only).
    pub index_callables: bool,
    /// Prefix of test ids for this crate.
    pub test_crate: String,
    pub integration: bool,
    pub callables: Vec<Callable>,
    pub tests: Vec<DiscoveredTest>,
    pub files: Vec<String>,
}

struct ModCtx {
    /// Module path from the crate root, excluding the crate name.
    module: Vec<String>,
    /// Module path inside the current file (inline modules only).
    inline: Vec<String>,
    cfg_test: bool,
    /// Directory where `mod x;` declarations are looked up.
    dir: String,
}

pub(crate) fn is_excluded(rel: &str, exclude: &[String]) -> bool {
    exclude.iter().any(|pattern| {
        let pattern = pattern.trim_end_matches('/');
        rel == pattern
            || rel.starts_with(&format!("{pattern}/"))
            || pattern
                .strip_suffix('*')
                .is_some_and(|prefix| rel.starts_with(prefix))
    })
}

fn join(dir: &str, name: &str) -> String {
    if dir.is_empty() {
        name.to_owned()
    } else {
        format!("{dir}/{name}")
    }
}

fn parent_dir(rel: &str) -> String {
    rel.rsplit_once('/').map(|(d, _)| d.to_owned()).unwrap_or_default()
}

impl<'a> CrateWalk<'a> {
    pub fn walk(&mut self, crate_root: &str, crate_name: &str) -> Result<()> {
        let ctx = ModCtx {
            module: Vec::new(),
            inline: Vec::new(),
            cfg_test: false,
            dir: parent_dir(crate_root),
        };
        self.walk_file(crate_root, ctx, crate_name)
    }

    fn walk_file(&mut self, rel: &str, ctx: ModCtx, crate_name: &str) -> Result<()> {
        if is_excluded(rel, self.exclude) {
            return Ok(());
        }
        let source = SourceFile::load(self.root, rel)?;
        let file = source.parse()?;
        self.files.push(rel.to_owned());
        self.walk_items(&source, &file.items, &ctx, crate_name)
    }

    fn walk_items(
        &mut self,
        source: &SourceFile,
        items: &[Item],
        ctx: &ModCtx,
        crate_name: &str,
    ) -> Result<()> {
        for item in items {
            match item {
                Item::Fn(f) => {
                    if is_test_fn(&f.attrs) {
                        if let Some(test) = self.collect_test(source, f, ctx) {
                            self.tests.push(test);
                        }
                    } else if self.index_callables && !ctx.cfg_test {
                        self.push_callable(source, &f.sig, &f.block, f, None, ctx, crate_name);
                    }
                }
                Item::Impl(imp) if self.index_callables && !ctx.cfg_test => {
                    let Some(self_ty) = type_name(&imp.self_ty) else {
                        continue;
                    };
                    for impl_item in &imp.items {
                        if let ImplItem::Fn(m) = impl_item {
                            self.push_callable(
                                source,
                                &m.sig,
                                &m.block,
                                m,
                                Some(&self_ty),
                                ctx,
                                crate_name,
                            );
                        }
                    }
                }
                Item::Mod(m) => {
                    let name = m.ident.to_string();
                    let cfg_test = ctx.cfg_test || has_cfg_test(&m.attrs);
                    let mut module = ctx.module.clone();
                    module.push(name.clone());
                    match &m.content {
                        Some((_, inner)) => {
                            let mut inline = ctx.inline.clone();
                            inline.push(name.clone());
                            let child = ModCtx {
                                module,
                                inline,
                                cfg_test,
                                dir: join(&ctx.dir, &name),
                            };
                            self.walk_items(source, inner, &child, crate_name)?;
                        }
                        None => {
                            let Some(rel) = self.module_file(&ctx.dir, &name, &m.attrs, source)
                            else {
                                continue;
                            };
                            let dir = if rel.ends_with("/mod.rs") || path_attr(&m.attrs).is_some() {
                                parent_dir(&rel)
                            } else {
                                join(&ctx.dir, &name)
                            };
                            let child = ModCtx {
                                module,
                                inline: Vec::new(),
                                cfg_test,
                                dir,
                            };
                            self.walk_file(&rel, child, crate_name)?;
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn module_file(
        &self,
        dir: &str,
        name: &str,
        attrs: &[Attribute],
        source: &SourceFile,
    ) -> Option<String> {
        if let Some(path) = path_attr(attrs) {
            let rel = normalize(&join(&parent_dir(&source.rel), &path));
            return self.root.join(&rel).is_file().then_some(rel);
        }
        [join(dir, &format!("{name}.rs")), join(dir, &format!("{name}/mod.rs"))]
            .into_iter()
            .find(|rel| self.root.join(rel).is_file())
    }

    #[allow(clippy::too_many_arguments)]
    fn push_callable<T: syn::spanned::Spanned>(
        &mut self,
        source: &SourceFile,
        sig: &syn::Signature,
        block: &syn::Block,
        item: &T,
        self_ty: Option<&str>,
        ctx: &ModCtx,
        crate_name: &str,
    ) {
        let (receiver, params, param_names) = signature_params(sig);
        let mut path = vec![crate_name.to_owned()];
        path.extend(ctx.module.iter().cloned());
        if let Some(ty) = self_ty {
            path.push(ty.to_owned());
        }
        let name = sig.ident.to_string();
        path.push(name.clone());
        let block_span = source.span_of(block);
        self.callables.push(Callable {
            path,
            name,
            self_ty: self_ty.map(str::to_owned),
            receiver,
            params,
            param_names,
            is_const: sig.constness.is_some(),
            has_output: crate::analysis::index::has_output(sig),
            file: source.rel.clone(),
            span: source.span_of(item),
            body_open: block_span.start + 1,
        });
    }

    fn collect_test(&self, source: &SourceFile, f: &ItemFn, ctx: &ModCtx) -> Option<DiscoveredTest> {
        if f.sig.asyncness.is_some() {
            return None;
        }
        let name = f.sig.ident.to_string();
        let mut id_parts = vec![self.test_crate.clone()];
        id_parts.extend(ctx.module.iter().cloned());
        id_parts.push(name.clone());

        let body: Vec<Fragment> = f
            .block
            .stmts
            .iter()
            .map(|s| {
                let span = source.span_of(s);
                Fragment {
                    span,
                    text: source.slice(span).to_owned(),
                }
            })
            .collect();

        let mut visitor = BodyVisitor {
            source,
            allow_list: self.allow_list,
            assertions: Vec::new(),
            calls: Vec::new(),
            current_assertion: None,
            depth: 0,
        };
        visitor.visit_block(&f.block);

        let output = match &f.sig.output {
            syn::ReturnType::Default => None,
            ret => Some(source.text_of(ret)),
        };
        let case = TestCase {
            id: id_parts.join("::"),
            name,
            file: source.rel.clone(),
            module_path: ctx.inline.clone(),
            integration: self.integration,
            span: source.span_of(f),
            body_span: source.span_of(&*f.block),
            output,
            should_panic: f.attrs.iter().any(|a| a.path().is_ident("should_panic")),
            ignored: f.attrs.iter().any(|a| a.path().is_ident("ignore")),
            body,
            assertions: visitor.assertions,
            target_calls: Vec::new(),
        };
        Some(DiscoveredTest {
            case,
            calls: visitor.calls,
        })
    }
}

fn normalize(rel: &str) -> String {
    let mut parts: Vec<&str> = Vec::new();
    for part in rel.split('/') {
        match part {
            "" | "." => {}
            ".." => {
                parts.pop();
            }
            p => parts.push(p),
        }
    }
    parts.join("/")
}

fn path_attr(attrs: &[Attribute]) -> Option<String> {
    attrs.iter().find_map(|a| {
        if !a.path().is_ident("path") {
            return None;
        }
        match &a.meta {
            syn::Meta::NameValue(nv) => match &nv.value {
                Expr::Lit(syn::ExprLit {
                    lit: syn::Lit::Str(s),
                    ..
                }) => Some(s.value()),
                _ => None,
            },
            _ => None,
        }
    })
}

pub(crate) fn is_test_fn(attrs: &[Attribute]) -> bool {
    attrs
        .iter()
        .any(|a| a.path().is_ident("test") && matches!(a.meta, syn::Meta::Path(_)))
}

fn has_cfg_test(attrs: &[Attribute]) -> bool {
    attrs.iter().any(|a| {
        a.path().is_ident("cfg")
            && a.parse_args::<syn::Ident>()
                .map(|i| i == "test")
                .unwrap_or(false)
    })
}

fn type_name(ty: &syn::Type) -> Option<String> {
    match ty {
        syn::Type::Path(tp) => tp.path.segments.last().map(|s| s.ident.to_string()),
        syn::Type::Group(g) => type_name(&g.elem),
        syn::Type::Paren(p) => type_name(&p.elem),
        _ => None,
    }
}

/// Collects assertion statements and call expressions of one test body.
/// Closures and nested items are not entered: calls made there are not
/// direct invocations.
struct BodyVisitor<'s> {
    source: &'s SourceFile,
    allow_list: &'s [String],
    assertions: Vec<AssertionSite>,
    calls: Vec<CallExpr>,
    current_assertion: Option<usize>,
    depth: usize,
}

fn last_segment(path: &syn::Path) -> String {
    path.segments
        .last()
        .map(|s| s.ident.to_string())
        .unwrap_or_default()
}

impl BodyVisitor<'_> {
    fn is_assertion_name(&self, name: &str) -> bool {
        self.allow_list.iter().any(|a| a == name)
    }

    fn is_assertion_expr(&self, expr: &Expr) -> bool {
        match expr {
            Expr::Macro(m) => self.is_assertion_name(&last_segment(&m.mac.path)),
            Expr::Call(c) => match &*c.func {
                Expr::Path(p) => self.is_assertion_name(&last_segment(&p.path)),
                _ => false,
            },
            _ => false,
        }
    }

    fn is_assertion_stmt(&self, stmt: &Stmt) -> bool {
        match stmt {
            Stmt::Macro(m) => self.is_assertion_name(&last_segment(&m.mac.path)),
            Stmt::Expr(e, _) => self.is_assertion_expr(e),
            _ => false,
        }
    }

    fn open_assertion(&mut self, span: ByteSpan, statement: bool) -> usize {
        let index = self.assertions.len();
        self.assertions.push(AssertionSite {
            index,
            span,
            text: self.source.slice(span).to_owned(),
            nested: self.depth > 1 || !statement,
            statement,
        });
        index
    }

    fn push_call(&mut self, callee: Callee, node: &Expr, args: Vec<&Expr>) {
        let span = self.source.span_of(node);
        let arg_spans: Vec<ByteSpan> = args.iter().map(|a| self.source.span_of(*a)).collect();
        self.calls.push(CallExpr {
            callee,
            span,
            text: self.source.slice(span).to_owned(),
            args: arg_spans.iter().map(|s| self.source.slice(*s).to_owned()).collect(),
            arg_spans,
            in_assertion: self.current_assertion,
        });
    }
}

impl<'ast> Visit<'ast> for BodyVisitor<'_> {
    fn visit_block(&mut self, block: &'ast syn::Block) {
        self.depth += 1;
        visit::visit_block(self, block);
        self.depth -= 1;
    }

    fn visit_stmt(&mut self, stmt: &'ast Stmt) {
        if self.current_assertion.is_none() && self.is_assertion_stmt(stmt) {
            let index = self.open_assertion(self.source.span_of(stmt), true);
            self.current_assertion = Some(index);
            visit::visit_stmt(self, stmt);
            self.current_assertion = None;
        } else {
            visit::visit_stmt(self, stmt);
        }
    }

    fn visit_expr(&mut self, expr: &'ast Expr) {
        if self.current_assertion.is_none() && self.is_assertion_expr(expr) {
            let index = self.open_assertion(self.source.span_of(expr), false);
            self.current_assertion = Some(index);
            visit::visit_expr(self, expr);
            self.current_assertion = None;
            return;
        }
        match expr {
            Expr::Call(call) => {
                if let Expr::Path(p) = &*call.func {
                    if p.qself.is_none() {
                        let segments = p.path.segments.iter().map(|s| s.ident.to_string()).collect();
                        self.push_call(Callee::Path(segments), expr, call.args.iter().collect());
                    }
                }
            }
            Expr::MethodCall(mc) => {
                self.push_call(
                    Callee::Method(mc.method.to_string()),
                    expr,
                    mc.args.iter().collect(),
                );
            }
            _ => {}
        }
        visit::visit_expr(self, expr);
    }

    fn visit_expr_closure(&mut self, _: &'ast syn::ExprClosure) {}

    fn visit_item(&mut self, _: &'ast Item) {}

    fn visit_macro(&mut self, mac: &'ast syn::Macro) {
        let parsed = mac.parse_body_with(
            syn::punctuated::Punctuated::<Expr, syn::Token![,]>::parse_terminated,
        );
        if let Ok(exprs) = parsed {
            for expr in &exprs {
                self.visit_expr(expr);
            }
        }
    }
}
