//! Name and annotation resolution: maps effect annotations and `perform`
//! labels into the selected effect system, builds the exception hierarchy,
//! binds calls to declarations and `break`s to their loops.

use std::collections::HashMap;

use super::ast::{self, Const, Expr, ExprKind, Program, TypeExpr};
use super::span::Span;
use crate::control::{ExcId, LoopId, PosetError, TagPoset};
use crate::diagnostic::{Diagnostic, Kind};
use crate::quantale::{Effect, EffectSystem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ty {
    Unit,
    Bool,
    Int,
    Fn(Box<Ty>, Box<Ty>, Effect),
    /// Type of expressions that never complete normally. Not writable.
    Never,
}

impl Ty {
    pub fn render(&self, sys: &EffectSystem) -> String {
        match self {
            Ty::Unit => "unit".into(),
            Ty::Bool => "bool".into(),
            Ty::Int => "int".into(),
            Ty::Never => "never".into(),
            Ty::Fn(p, r, e) => format!("fn({}) -> {} @effect({})", p.render(sys), r.render(sys), sys.render(e)),
        }
    }

    /// The type of a join point where both sides may flow.
    pub fn unify(&self, other: &Ty) -> Option<Ty> {
        match (self, other) {
            (Ty::Never, t) | (t, Ty::Never) => Some(t.clone()),
            (a, b) if a == b => Some(a.clone()),
            _ => None,
        }
    }

    /// Whether a value of this type may be used where `want` is expected.
    pub fn fits(&self, want: &Ty) -> bool {
        *self == Ty::Never || self == want
    }
}

#[derive(Debug, Clone)]
pub struct Signature {
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
    pub effect: Effect,
    /// Declared exceptional effects, with the annotation span.
    pub throws: Vec<(ExcId, Effect, Span)>,
}

#[derive(Debug, Clone)]
pub struct Function {
    pub name: String,
    pub name_span: Span,
    pub span: Span,
    pub sig: Signature,
    pub body: RExpr,
}

#[derive(Debug, Clone)]
pub struct ResolvedProgram {
    pub poset: TagPoset,
    pub functions: Vec<Function>,
}

impl ResolvedProgram {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct RExpr {
    pub kind: RKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct RCatch {
    pub exception: ExcId,
    pub body: RExpr,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum RKind {
    Var(String),
    Const(Const),
    Lambda { param: String, ty: Ty, latent: Effect, body: Box<RExpr> },
    App { fun: Box<RExpr>, arg: Box<RExpr> },
    /// Call of the declared function with this index.
    Call { func: usize, args: Vec<RExpr> },
    If { cond: Box<RExpr>, then: Box<RExpr>, els: Option<Box<RExpr>> },
    While { cond: Box<RExpr>, body: Box<RExpr>, header: Span, id: LoopId },
    Seq(Box<RExpr>, Box<RExpr>),
    Let { name: String, value: Box<RExpr>, body: Box<RExpr> },
    Perform { label: String, effect: Effect },
    Throw(ExcId),
    Try { body: Box<RExpr>, catches: Vec<RCatch> },
    Break(LoopId),
    Return(Option<Box<RExpr>>),
}

impl RExpr {
    fn new(kind: RKind, span: Span) -> Self {
        RExpr { kind, span }
    }
}

pub fn resolve(prog: &Program, sys: &EffectSystem) -> Result<ResolvedProgram, Vec<Diagnostic>> {
    let mut r = Resolver { sys, errors: Vec::new(), poset: TagPoset::new(), fn_index: HashMap::new(), arity: Vec::new(), next_loop: 0 };
    for d in &prog.exceptions {
        if let Err(e) = r.poset.declare(&d.name.name, d.parent.as_ref().map(|p| p.name.as_str())) {
            let (kind, span) = match &e {
                PosetError::Duplicate(_) => (Kind::DuplicateDefinition, d.name.span),
                PosetError::UnknownParent(_) => (Kind::UnknownException, d.parent.as_ref().map_or(d.span, |p| p.span)),
            };
            r.errors.push(Diagnostic::new(kind, span, e.to_string()));
        }
    }
    for (i, f) in prog.functions.iter().enumerate() {
        if r.fn_index.contains_key(f.name.name.as_str()) {
            r.errors.push(Diagnostic::new(
                Kind::DuplicateDefinition,
                f.name.span,
                format!("function `{}` is defined twice", f.name.name),
            ));
            continue;
        }
        r.fn_index.insert(f.name.name.clone(), i);
    }
    r.arity = prog.functions.iter().map(|f| f.params.len()).collect();
    let sigs: Vec<Option<Signature>> = prog.functions.iter().map(|f| r.signature(f)).collect();
    let mut functions = Vec::new();
    for (f, sig) in prog.functions.iter().zip(sigs) {
        let mut scope: Vec<String> = f.params.iter().map(|p| p.name.name.clone()).collect();
        let body = r.expr(&f.body, &mut scope, &mut Vec::new());
        if let (Some(sig), Some(body)) = (sig, body) {
            functions.push(Function { name: f.name.name.clone(), name_span: f.name.span, span: f.span, sig, body });
        }
    }
    if r.errors.is_empty() {
        Ok(ResolvedProgram { poset: r.poset, functions })
    } else {
        r.errors.sort_by_key(|d| d.span);
        Err(r.errors)
    }
}

struct Resolver<'a> {
    sys: &'a EffectSystem,
    errors: Vec<Diagnostic>,
    poset: TagPoset,
    fn_index: HashMap<String, usize>,
    arity: Vec<usize>,
    next_loop: u32,
}

impl Resolver<'_> {
    fn effect(&mut self, ann: &ast::EffectAnn) -> Option<Effect> {
        match self.sys.parse_effect(ann.text.trim()) {
            Ok(e) => Some(e),
            Err(e) => {
                self.errors.push(Diagnostic::new(
                    Kind::UnknownEffect,
                    ann.span,
                    format!("`{}` is not an effect of system `{}`: {e}", ann.text.trim(), self.sys.name()),
                ));
                None
            }
        }
    }

    fn ty(&mut self, t: &TypeExpr) -> Option<Ty> {
        Some(match t {
            TypeExpr::Unit => Ty::Unit,
            TypeExpr::Bool => Ty::Bool,
            TypeExpr::Int => Ty::Int,
            TypeExpr::Fn { param, ret, latent } => {
                let p = self.ty(param);
                let r = self.ty(ret);
                let e = self.effect(latent);
                Ty::Fn(Box::new(p?), Box::new(r?), e?)
            }
        })
    }

    fn exception(&mut self, id: &ast::Ident) -> Option<ExcId> {
        let found = self.poset.lookup(&id.name);
        if found.is_none() {
            self.errors.push(Diagnostic::new(
                Kind::UnknownException,
                id.span,
                format!("unknown exception `{}`", id.name),
            ));
        }
        found
    }

    fn signature(&mut self, f: &ast::FnDecl) -> Option<Signature> {
        let mut ok = true;
        let mut params = Vec::new();
        for p in &f.params {
            match self.ty(&p.ty) {
                Some(t) => params.push((p.name.name.clone(), t)),
                None => ok = false,
            }
        }
        let ret = self.ty(&f.ret);
        let effect = self.effect(&f.effect);
        let mut throws = Vec::new();
        for t in &f.throws {
            let exc = self.exception(&t.exception);
            let eff = self.effect(&t.effect);
            match (exc, eff) {
                (Some(x), Some(e)) => {
                    if throws.iter().any(|(y, _, _)| *y == x) {
                        self.errors.push(Diagnostic::new(
                            Kind::DuplicateDefinition,
                            t.span,
                            format!("`{}` has two `@throws` annotations", t.exception.name),
                        ));
                        ok = false;
                    }
                    throws.push((x, e, t.span));
                }
                _ => ok = false,
            }
        }
        if !ok {
            return None;
        }
        Some(Signature { params, ret: ret?, effect: effect?, throws })
    }

    fn boxed(&mut self, e: &Expr, scope: &mut Vec<String>, loops: &mut Vec<LoopId>) -> Option<Box<RExpr>> {
        self.expr(e, scope, loops).map(Box::new)
    }

    /// Resolves every subexpression even after an error, so all problems in
    /// a body are reported together.
    fn expr(&mut self, e: &Expr, scope: &mut Vec<String>, loops: &mut Vec<LoopId>) -> Option<RExpr> {
        let kind = match &e.kind {
            ExprKind::Var(x) => RKind::Var(x.clone()),
            ExprKind::Const(c) => RKind::Const(*c),
            ExprKind::Lambda { param, ty, latent, body } => {
                let ty = self.ty(ty);
                let latent = self.effect(latent);
                scope.push(param.name.clone());
                let body = self.boxed(body, scope, &mut Vec::new());
                scope.pop();
                RKind::Lambda { param: param.name.clone(), ty: ty?, latent: latent?, body: body? }
            }
            ExprKind::App { fun, arg } => {
                let fun = self.boxed(fun, scope, loops);
                let arg = self.boxed(arg, scope, loops);
                RKind::App { fun: fun?, arg: arg? }
            }
            ExprKind::Call { name, args } => {
                let rargs: Vec<Option<RExpr>> = args.iter().map(|a| self.expr(a, scope, loops)).collect();
                let rargs: Option<Vec<RExpr>> = rargs.into_iter().collect();
                if scope.contains(&name.name) {
                    if args.len() != 1 {
                        self.errors.push(Diagnostic::new(
                            Kind::ArityMismatch,
                            e.span,
                            format!("function value `{}` takes one argument, found {}", name.name, args.len()),
                        ));
                        return None;
                    }
                    let arg = rargs?.pop().expect("one argument");
                    RKind::App { fun: Box::new(RExpr::new(RKind::Var(name.name.clone()), name.span)), arg: Box::new(arg) }
                } else if let Some(&func) = self.fn_index.get(&name.name) {
                    if self.arity[func] != args.len() {
                        self.errors.push(Diagnostic::new(
                            Kind::ArityMismatch,
                            e.span,
                            format!("`{}` takes {} argument(s), found {}", name.name, self.arity[func], args.len()),
                        ));
                        return None;
                    }
                    RKind::Call { func, args: rargs? }
                } else {
                    self.errors.push(Diagnostic::new(
                        Kind::UnknownFunction,
                        name.span,
                        format!("unknown function `{}`", name.name),
                    ));
                    return None;
                }
            }
            ExprKind::If { cond, then, els } => {
                let c = self.boxed(cond, scope, loops);
                let t = self.boxed(then, scope, loops);
                let f = match els {
                    Some(x) => Some(self.boxed(x, scope, loops)?),
                    None => None,
                };
                RKind::If { cond: c?, then: t?, els: f }
            }
            ExprKind::While { cond, body, header } => {
                let id = LoopId(self.next_loop);
                self.next_loop += 1;
                let c = self.boxed(cond, scope, loops);
                loops.push(id);
                let b = self.boxed(body, scope, loops);
                loops.pop();
                RKind::While { cond: c?, body: b?, header: *header, id }
            }
            ExprKind::Seq(a, b) => {
                let a = self.boxed(a, scope, loops);
                let b = self.boxed(b, scope, loops);
                RKind::Seq(a?, b?)
            }
            ExprKind::Let { name, value, body } => {
                let v = self.boxed(value, scope, loops);
                scope.push(name.name.clone());
                let b = self.boxed(body, scope, loops);
                scope.pop();
                RKind::Let { name: name.name.clone(), value: v?, body: b? }
            }
            ExprKind::Perform(label) => match self.sys.atom(&label.name) {
                Some(effect) => RKind::Perform { label: label.name.clone(), effect },
                None => {
                    let known: Vec<&str> = self.sys.atom_labels().collect();
                    self.errors.push(Diagnostic::new(
                        Kind::UnknownLabel,
                        label.span,
                        format!(
                            "unknown effect label `{}` for system `{}` (known: {})",
                            label.name,
                            self.sys.name(),
                            known.join(", ")
                        ),
                    ));
                    return None;
                }
            },
            ExprKind::Throw(x) => RKind::Throw(self.exception(x)?),
            ExprKind::Try { body, catches } => {
                let b = self.boxed(body, scope, loops);
                let rc: Vec<Option<RCatch>> = catches
                    .iter()
                    .map(|c| {
                        let x = self.exception(&c.exception);
                        let h = self.expr(&c.body, scope, loops);
                        Some(RCatch { exception: x?, body: h?, span: c.span })
                    })
                    .collect();
                let rc: Option<Vec<RCatch>> = rc.into_iter().collect();
                RKind::Try { body: b?, catches: rc? }
            }
            ExprKind::Break => match loops.last() {
                Some(&id) => RKind::Break(id),
                None => {
                    self.errors.push(Diagnostic::new(Kind::InvalidBreak, e.span, "`break` outside of a loop"));
                    return None;
                }
            },
            ExprKind::Return(v) => match v {
                Some(v) => RKind::Return(Some(self.boxed(v, scope, loops)?)),
                None => RKind::Return(None),
            },
        };
        Some(RExpr::new(kind, e.span))
    }
}
