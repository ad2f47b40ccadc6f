//! The residual-driven checker.
//!
//! Each function body is walked in evaluation order with a context holding
//! the prefix effect `χ0` (only its normal part is kept, for messages and
//! classification) and the remaining budget `χ0 \ χm`. Every construct that
//! contributes effect of its own (perform, application, call, conditional,
//! loop, throw, break, return, try) performs exactly one residual check of
//! that effect against the remaining budget; sequencing and `let` only
//! thread the context. The first failing check pinpoints the earliest
//! prefix that no continuation can complete within the declared bound.
//!
//! After a diagnostic the current path is poisoned and further diagnostics
//! on it are suppressed. Conditionals reset the flag when only one branch
//! failed, continuing with the healthy branch; lambda bodies are checked in
//! a fresh context. In commutative systems a failed residual check instead
//! drops the offending effect and keeps going, so independent violations
//! are all reported.

use crate::control::{ControlAlgebra, ControlEffect, ControlTag, ExcId};
use crate::diagnostic::{Diagnostic, Kind};
use crate::quantale::{Effect, EffectSystem};
use crate::syntax::resolve::{Function, RExpr, RKind, ResolvedProgram, Ty};
use crate::syntax::span::Span;

use super::global::const_ty;
use super::{callee_effect, effect_error, end_check, function_target, normalize, render_brief, FunctionOutcome};

/// Deliberate checker bugs, for mutation tests of the verification harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    SkipPerformCheck,
    SkipAppCheck,
    SkipIfCheck,
    SkipWhileCheck,
}

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    pub fault: Option<Fault>,
    /// Re-verify after every accepted subexpression that its effect has a
    /// residual against the budget it started with.
    pub verify_completability: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckStats {
    /// Residual checks actually evaluated.
    pub residual_checks: usize,
    pub completability_checks: usize,
    pub completability_violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Site {
    Perform,
    App,
    Call,
    If,
    While,
    Jump,
    Try,
}

#[derive(Debug, Clone)]
struct Ctx {
    /// `χ0 \ χm`.
    rem: ControlEffect,
    /// Normal part of `χ0`; `None` once every path has jumped away.
    prefix: Option<Effect>,
    /// Tags caught by an enclosing `try` or loop.
    handled: Vec<ControlTag>,
    /// Tags the enclosing function or lambda may let escape.
    declared: Vec<ControlTag>,
    poisoned: bool,
}

enum RetSlot {
    Declared(Ty),
    Lambda(Ty),
}

pub fn early_check(sys: &EffectSystem, prog: &ResolvedProgram, opts: &CheckOptions) -> (Vec<FunctionOutcome>, CheckStats) {
    let mut c = Early {
        alg: ControlAlgebra::new(sys, &prog.poset),
        prog,
        opts,
        stats: CheckStats::default(),
        diags: Vec::new(),
        env: Vec::new(),
        rets: Vec::new(),
    };
    let outcomes = prog.functions.iter().map(|f| c.function(f)).collect();
    (outcomes, c.stats)
}

struct Early<'a> {
    alg: ControlAlgebra<'a>,
    prog: &'a ResolvedProgram,
    opts: &'a CheckOptions,
    stats: CheckStats,
    diags: Vec<Diagnostic>,
    env: Vec<(String, Ty)>,
    rets: Vec<RetSlot>,
}

impl Early<'_> {
    fn function(&mut self, f: &Function) -> FunctionOutcome {
        self.diags.clear();
        let mut out = FunctionOutcome { name: f.name.clone(), ty: None, effect: None, diagnostics: Vec::new() };
        let target = match function_target(&self.alg, &f.sig, f.name_span) {
            Ok(t) => t,
            Err(d) => {
                out.diagnostics.push(d);
                return out;
            }
        };
        self.env = f.sig.params.clone();
        self.rets = vec![RetSlot::Declared(f.sig.ret.clone())];
        let mut ctx = Ctx {
            declared: target.controls().iter().map(|(t, _)| *t).collect(),
            rem: target.clone(),
            prefix: Some(self.alg.sys.unit()),
            handled: Vec::new(),
            poisoned: false,
        };
        let (ty, eff) = self.expr(&mut ctx, &f.body);
        if !ctx.poisoned {
            if !ty.fits(&f.sig.ret) {
                let sys = self.alg.sys;
                let msg = format!("body of `{}` has type {}, expected {}", f.name, ty.render(sys), f.sig.ret.render(sys));
                self.emit(&mut ctx, Diagnostic::new(Kind::TypeMismatch, f.body.span, msg));
            }
            if let Some(flat) = self.flatten(&mut ctx, &eff, ControlTag::Return, f.name_span) {
                let what = format!("function `{}`", f.name);
                for d in end_check(&self.alg, &what, &flat, &target, f.name_span) {
                    self.diags.push(d);
                }
                if self.diags.is_empty() {
                    out.effect = Some(flat);
                }
            }
            out.ty = Some(ty);
        }
        out.diagnostics = std::mem::take(&mut self.diags);
        out
    }

    fn emit(&mut self, ctx: &mut Ctx, d: Diagnostic) {
        if !ctx.poisoned {
            self.diags.push(d);
        }
        ctx.poisoned = true;
    }

    fn render(&self, c: &ControlEffect) -> String {
        render_brief(&self.alg, c)
    }

    fn render_prefix(&self, ctx: &Ctx) -> String {
        ctx.prefix.as_ref().map_or_else(|| "none".to_string(), |p| self.alg.sys.render(p))
    }

    fn expect_ty(&mut self, ctx: &mut Ctx, got: &Ty, want: &Ty, span: Span, what: &str) {
        if !got.fits(want) {
            let sys = self.alg.sys;
            let msg = format!("{what} has type {}, expected {}", got.render(sys), want.render(sys));
            self.emit(ctx, Diagnostic::new(Kind::TypeMismatch, span, msg));
        }
    }

    fn seq(&mut self, ctx: &mut Ctx, a: &ControlEffect, b: &ControlEffect, span: Span) -> Option<ControlEffect> {
        match self.alg.seq(a, b) {
            Ok(Some(c)) => self.normalize(ctx, c, span),
            Ok(None) => {
                let msg = format!("{} cannot be followed by {}", self.render(a), self.render(b));
                self.emit(ctx, Diagnostic::new(Kind::UndefinedSeq, span, msg));
                None
            }
            Err(e) => {
                self.emit(ctx, effect_error(span, e));
                None
            }
        }
    }

    fn normalize(&mut self, ctx: &mut Ctx, c: ControlEffect, span: Span) -> Option<ControlEffect> {
        match normalize(&self.alg, &c, span) {
            Ok(c) => Some(c),
            Err(d) => {
                self.emit(ctx, d);
                None
            }
        }
    }

    fn flatten(&mut self, ctx: &mut Ctx, c: &ControlEffect, tag: ControlTag, span: Span) -> Option<ControlEffect> {
        match self.alg.flatten(c, &[tag]) {
            Ok(Some(f)) => Some(f),
            Ok(None) => {
                let msg = format!("jumps to `{}` have no common effect with normal completion", self.alg.poset.tag_name(tag));
                self.emit(ctx, Diagnostic::new(Kind::UndefinedJoin, span, msg));
                None
            }
            Err(e) => {
                self.emit(ctx, effect_error(span, e));
                None
            }
        }
    }

    fn skipped(&self, site: Site) -> bool {
        matches!(
            (self.opts.fault, site),
            (Some(Fault::SkipPerformCheck), Site::Perform)
                | (Some(Fault::SkipAppCheck), Site::App)
                | (Some(Fault::SkipIfCheck), Site::If)
                | (Some(Fault::SkipWhileCheck), Site::While)
        )
    }

    /// The construct's single residual check. On success the budget and
    /// prefix advance past `node`. Returns whether `node` is kept in the
    /// synthesized effect.
    fn check(&mut self, ctx: &mut Ctx, node: &ControlEffect, span: Span, site: Site) -> bool {
        if ctx.poisoned || ctx.prefix.is_none() || self.skipped(site) {
            return true;
        }
        self.stats.residual_checks += 1;
        let r = match self.alg.residual_excluding(node, &ctx.rem, &ctx.handled) {
            Ok(r) => r,
            Err(e) => {
                self.emit(ctx, effect_error(span, e));
                return false;
            }
        };
        if let Some(r) = r {
            ctx.rem = r;
            ctx.prefix = match (&ctx.prefix, &node.normal) {
                (_, None) => None,
                (Some(p), Some(n)) => Some(self.alg.sys.seq(p, n).ok().flatten().unwrap_or_else(|| p.clone())),
                (None, Some(_)) => None,
            };
            return true;
        }
        let sys = self.alg.sys;
        let prefix = ctx.prefix.clone().expect("checked above");
        let seq_undefined = match &node.normal {
            Some(n) => matches!(sys.seq(&prefix, n), Ok(None)),
            None => false,
        };
        let escaping = node.controls().iter().find(|(t, _)| {
            !ctx.handled.contains(t) && !ctx.declared.iter().any(|u| self.alg.poset.le(*t, *u))
        });
        let (kind, message) = if seq_undefined {
            (
                Kind::UndefinedSeq,
                format!(
                    "effect {} cannot follow the prefix {}",
                    self.render(node),
                    self.render_prefix(ctx)
                ),
            )
        } else if let Some((t, _)) = escaping {
            (Kind::UncaughtException, format!("`{}` escapes here but is not declared", self.alg.poset.tag_name(*t)))
        } else {
            (
                Kind::ResidualUndefined,
                format!(
                    "after {}, effect {} leaves no way to complete within the declared bound",
                    self.render_prefix(ctx),
                    self.render(node)
                ),
            )
        };
        let d = Diagnostic::new(kind, span, message).with_effects(self.render_prefix(ctx), self.render(&ctx.rem));
        if kind == Kind::ResidualUndefined && sys.is_commutative() {
            self.diags.push(d);
        } else {
            self.emit(ctx, d);
        }
        false
    }

    fn expr(&mut self, ctx: &mut Ctx, e: &RExpr) -> (Ty, ControlEffect) {
        if !self.opts.verify_completability {
            return self.expr_inner(ctx, e);
        }
        let live = !ctx.poisoned && ctx.prefix.is_some();
        let entry_rem = ctx.rem.clone();
        let handled = ctx.handled.clone();
        let (ty, eff) = self.expr_inner(ctx, e);
        if live && !ctx.poisoned {
            self.stats.completability_checks += 1;
            if !matches!(self.alg.residual_excluding(&eff, &entry_rem, &handled), Ok(Some(_))) {
                self.stats.completability_violations += 1;
            }
        }
        (ty, eff)
    }

    fn expr_inner(&mut self, ctx: &mut Ctx, e: &RExpr) -> (Ty, ControlEffect) {
        let unit = self.alg.unit();
        let failed = (Ty::Never, unit.clone());
        match &e.kind {
            RKind::Var(x) => match self.env.iter().rev().find(|(n, _)| n == x) {
                Some((_, t)) => (t.clone(), unit),
                None => {
                    self.emit(ctx, Diagnostic::new(Kind::UnboundVar, e.span, format!("unbound variable `{x}`")));
                    failed
                }
            },
            RKind::Const(c) => (const_ty(*c), unit),
            RKind::Lambda { param, ty, latent, body } => {
                let rty = self.lambda(param, ty, latent, body, e.span);
                (Ty::Fn(Box::new(ty.clone()), Box::new(rty), latent.clone()), unit)
            }
            RKind::App { fun, arg } => {
                let (fty, c1) = self.expr(ctx, fun);
                let (aty, c2) = self.expr(ctx, arg);
                let (p, r, latent) = match fty {
                    Ty::Fn(p, r, l) => (p, r, l),
                    other => {
                        let msg = format!("applied expression has type {}", other.render(self.alg.sys));
                        self.emit(ctx, Diagnostic::new(Kind::NotAFunction, fun.span, msg));
                        return failed;
                    }
                };
                self.expect_ty(ctx, &aty, &p, arg.span, "argument");
                let node = self.alg.lift(latent);
                let kept = if self.check(ctx, &node, e.span, Site::App) { node } else { unit };
                let Some(c) = self.seq(ctx, &c1, &c2, e.span) else { return failed };
                let Some(c) = self.seq(ctx, &c, &kept, e.span) else { return failed };
                (*r, c)
            }
            RKind::Call { func, args } => {
                let callee = &self.prog.functions[*func];
                let mut c = unit.clone();
                for (a, (_, pty)) in args.iter().zip(&callee.sig.params) {
                    let (aty, ca) = self.expr(ctx, a);
                    self.expect_ty(ctx, &aty, pty, a.span, "argument");
                    let Some(next) = self.seq(ctx, &c, &ca, e.span) else { return failed };
                    c = next;
                }
                let node = match callee_effect(&self.alg, &callee.sig, e.span) {
                    Ok(n) => n,
                    Err(d) => {
                        self.emit(ctx, d);
                        return failed;
                    }
                };
                let kept = if self.check(ctx, &node, e.span, Site::Call) { node } else { unit };
                let Some(c) = self.seq(ctx, &c, &kept, e.span) else { return failed };
                (callee.sig.ret.clone(), c)
            }
            RKind::If { cond, then, els } => self.if_expr(ctx, cond, then, els.as_deref(), e.span),
            RKind::While { cond, body, header, id } => self.while_expr(ctx, cond, body, *header, ControlTag::Break(*id)),
            RKind::Seq(a, b) => {
                let (_, ca) = self.expr(ctx, a);
                let (ty, cb) = self.expr(ctx, b);
                match self.seq(ctx, &ca, &cb, b.span) {
                    Some(c) => (ty, c),
                    None => failed,
                }
            }
            RKind::Let { name, value, body } => {
                let (vty, cv) = self.expr(ctx, value);
                self.env.push((name.clone(), vty));
                let (ty, cb) = self.expr(ctx, body);
                self.env.pop();
                match self.seq(ctx, &cv, &cb, body.span) {
                    Some(c) => (ty, c),
                    None => failed,
                }
            }
            RKind::Perform { effect, .. } => {
                let node = self.alg.lift(effect.clone());
                let kept = if self.check(ctx, &node, e.span, Site::Perform) { node } else { unit };
                (Ty::Unit, kept)
            }
            RKind::Throw(x) => {
                let node = self.alg.jump(ControlTag::Exception(*x));
                let kept = if self.check(ctx, &node, e.span, Site::Jump) { node } else { unit };
                (Ty::Never, kept)
            }
            RKind::Break(id) => {
                let node = self.alg.jump(ControlTag::Break(*id));
                let kept = if self.check(ctx, &node, e.span, Site::Jump) { node } else { unit };
                (Ty::Never, kept)
            }
            RKind::Return(v) => {
                let (vty, cv) = match v {
                    Some(v) => self.expr(ctx, v),
                    None => (Ty::Unit, unit.clone()),
                };
                match self.rets.last_mut().expect("inside a body") {
                    RetSlot::Declared(want) => {
                        let want = want.clone();
                        self.expect_ty(ctx, &vty, &want, e.span, "returned value");
                    }
                    RetSlot::Lambda(so_far) => match so_far.unify(&vty) {
                        Some(t) => *so_far = t,
                        None => self.emit(
                            ctx,
                            Diagnostic::new(Kind::TypeMismatch, e.span, "`return`s in a lambda have different types"),
                        ),
                    },
                }
                let node = self.alg.jump(ControlTag::Return);
                let kept = if self.check(ctx, &node, e.span, Site::Jump) { node } else { unit };
                match self.seq(ctx, &cv, &kept, e.span) {
                    Some(c) => (Ty::Never, c),
                    None => failed,
                }
            }
            RKind::Try { body, catches } => self.try_expr(ctx, body, catches, e.span),
        }
    }

    /// Checks a lambda body in a fresh context and returns its result type.
    fn lambda(&mut self, param: &str, ty: &Ty, latent: &Effect, body: &RExpr, span: Span) -> Ty {
        self.env.push((param.to_string(), ty.clone()));
        self.rets.push(RetSlot::Lambda(Ty::Never));
        let bound = ControlEffect::from_parts(Some(latent.clone()), vec![(ControlTag::Return, latent.clone())])
            .expect("one entry");
        let mut lctx = Ctx {
            rem: bound,
            prefix: Some(self.alg.sys.unit()),
            handled: Vec::new(),
            declared: vec![ControlTag::Return],
            poisoned: false,
        };
        let (bty, beff) = self.expr(&mut lctx, body);
        self.env.pop();
        let Some(RetSlot::Lambda(rty)) = self.rets.pop() else { unreachable!("pushed above") };
        let rty = match bty.unify(&rty) {
            Some(t) => t,
            None => {
                let msg = "lambda body and its `return`s have different types";
                self.emit(&mut lctx, Diagnostic::new(Kind::TypeMismatch, body.span, msg));
                Ty::Never
            }
        };
        if !lctx.poisoned {
            if let Some(flat) = self.flatten(&mut lctx, &beff, ControlTag::Return, span) {
                let bound = ControlEffect::from_parts(Some(latent.clone()), Vec::new()).expect("no entries");
                for d in end_check(&self.alg, "lambda", &flat, &bound, span) {
                    self.diags.push(d);
                }
            }
        }
        if rty == Ty::Never {
            Ty::Unit
        } else {
            rty
        }
    }

    fn if_expr(&mut self, ctx: &mut Ctx, cond: &RExpr, then: &RExpr, els: Option<&RExpr>, span: Span) -> (Ty, ControlEffect) {
        let unit = self.alg.unit();
        let (cty, cc) = self.expr(ctx, cond);
        self.expect_ty(ctx, &cty, &Ty::Bool, cond.span, "condition");
        let mut tctx = ctx.clone();
        let (tty, ct) = self.expr(&mut tctx, then);
        let mut fctx = ctx.clone();
        let (fty, cf) = match els {
            Some(x) => self.expr(&mut fctx, x),
            None => (Ty::Unit, unit.clone()),
        };
        let ty = if els.is_none() {
            Ty::Unit
        } else {
            match tty.unify(&fty) {
                Some(t) => t,
                None => {
                    let sys = self.alg.sys;
                    let msg = format!("branches have types {} and {}", tty.render(sys), fty.render(sys));
                    self.emit(ctx, Diagnostic::new(Kind::TypeMismatch, span, msg));
                    return (Ty::Never, unit);
                }
            }
        };
        if ctx.poisoned {
            return (ty, cc);
        }
        let branches = match (tctx.poisoned, fctx.poisoned) {
            (false, false) => match self.alg.join(&ct, &cf) {
                Ok(Some(j)) => match self.normalize(ctx, j, span) {
                    Some(j) => j,
                    None => return (ty, cc),
                },
                Ok(None) => {
                    let msg = format!("branches with effects {} and {} have no common bound", self.render(&ct), self.render(&cf));
                    let d = Diagnostic::new(Kind::UndefinedJoin, span, msg);
                    self.emit(ctx, d);
                    return (ty, cc);
                }
                Err(e) => {
                    self.emit(ctx, effect_error(span, e));
                    return (ty, cc);
                }
            },
            (true, false) => cf,
            (false, true) => ct,
            (true, true) => {
                ctx.poisoned = true;
                return (ty, cc);
            }
        };
        let kept = if self.check(ctx, &branches, span, Site::If) { branches } else { unit };
        match self.seq(ctx, &cc, &kept, span) {
            Some(c) => (ty, c),
            None => (ty, cc),
        }
    }

    fn while_expr(&mut self, ctx: &mut Ctx, cond: &RExpr, body: &RExpr, header: Span, tag: ControlTag) -> (Ty, ControlEffect) {
        let unit = self.alg.unit();
        let (cty, cc) = self.expr(ctx, cond);
        self.expect_ty(ctx, &cty, &Ty::Bool, cond.span, "condition");
        let mut bctx = ctx.clone();
        bctx.handled.push(tag);
        let (_, cb) = self.expr(&mut bctx, body);
        if ctx.poisoned {
            return (Ty::Unit, cc);
        }
        if bctx.poisoned {
            ctx.poisoned = true;
            return (Ty::Unit, cc);
        }
        let Some(round) = self.seq(ctx, &cb, &cc, header) else { return (Ty::Unit, cc) };
        let star = match self.alg.iter(&round) {
            Ok(Some(s)) => s,
            Ok(None) => {
                let msg = format!("loop iteration {} has no iterated effect", self.render(&round));
                let d = Diagnostic::new(Kind::UndefinedIter, header, msg)
                    .with_effects(self.render_prefix(ctx), self.render(&ctx.rem));
                self.emit(ctx, d);
                return (Ty::Unit, cc);
            }
            Err(e) => {
                self.emit(ctx, effect_error(header, e));
                return (Ty::Unit, cc);
            }
        };
        let Some(looped) = self.flatten(ctx, &star, tag, header) else { return (Ty::Unit, cc) };
        let kept = if self.check(ctx, &looped, header, Site::While) { looped } else { unit };
        match self.seq(ctx, &cc, &kept, header) {
            Some(c) => (Ty::Unit, c),
            None => (Ty::Unit, cc),
        }
    }

    fn try_expr(&mut self, ctx: &mut Ctx, body: &RExpr, catches: &[crate::syntax::resolve::RCatch], span: Span) -> (Ty, ControlEffect) {
        let unit = self.alg.unit();
        let poset = self.alg.poset;
        let caught: Vec<ControlTag> = (0..poset.len() as u32)
            .map(ExcId)
            .filter(|x| catches.iter().any(|c| poset.le(ControlTag::Exception(*x), ControlTag::Exception(c.exception))))
            .map(ControlTag::Exception)
            .collect();
        let mut bctx = ctx.clone();
        bctx.handled.extend(caught.iter().copied());
        let (mut ty, cb) = self.expr(&mut bctx, body);
        let mut any_poisoned = bctx.poisoned;
        let mut handlers = Vec::new();
        for (i, c) in catches.iter().enumerate() {
            // Prefixes of the exceptions this clause is the first to match.
            let mut prefix: Option<Effect> = None;
            let mut join_failed = false;
            for (t, p) in cb.controls() {
                let first = catches.iter().position(|k| poset.le(*t, ControlTag::Exception(k.exception)));
                if !matches!(t, ControlTag::Exception(_)) || first != Some(i) {
                    continue;
                }
                prefix = match prefix {
                    None => Some(p.clone()),
                    Some(q) => match self.alg.sys.join(&q, p) {
                        Ok(Some(j)) => Some(j),
                        _ => {
                            join_failed = true;
                            Some(q)
                        }
                    },
                };
            }
            let mut hctx = ctx.clone();
            match &prefix {
                None => hctx.prefix = None,
                Some(p) if !hctx.poisoned && hctx.prefix.is_some() && !join_failed => {
                    let entry = self.alg.lift(p.clone());
                    match self.alg.residual_excluding(&entry, &hctx.rem, &hctx.handled) {
                        Ok(Some(r)) => {
                            hctx.rem = r;
                            hctx.prefix = hctx.prefix.as_ref().and_then(|q| self.alg.sys.seq(q, p).ok().flatten());
                        }
                        _ => {
                            let msg = format!(
                                "handler for `{}` starts after {}, which leaves no way to complete within the declared bound",
                                poset.name(c.exception),
                                self.alg.sys.render(p)
                            );
                            let d = Diagnostic::new(Kind::ResidualUndefined, c.span, msg)
                                .with_effects(self.render_prefix(ctx), self.render(&ctx.rem));
                            self.emit(&mut hctx, d);
                        }
                    }
                }
                Some(_) => {}
            }
            let (hty, ch) = self.expr(&mut hctx, &c.body);
            if prefix.is_some() {
                any_poisoned |= hctx.poisoned;
            }
            match ty.unify(&hty) {
                Some(t) => ty = t,
                None => {
                    let d = Diagnostic::new(Kind::TypeMismatch, c.span, "handler type differs from the protected block");
                    self.emit(ctx, d);
                    return (Ty::Never, unit);
                }
            }
            handlers.push((c.exception, ch));
        }
        if ctx.poisoned {
            return (ty, unit);
        }
        if any_poisoned {
            ctx.poisoned = true;
            return (ty, unit);
        }
        let combined = match self.alg.handle(&cb, &handlers) {
            Ok(Some(c)) => match self.normalize(ctx, c, span) {
                Some(c) => c,
                None => return (ty, unit),
            },
            Ok(None) => {
                let d = Diagnostic::new(Kind::UndefinedJoin, span, "handled and unhandled paths have no common effect");
                self.emit(ctx, d);
                return (ty, unit);
            }
            Err(e) => {
                self.emit(ctx, effect_error(span, e));
                return (ty, unit);
            }
        };
        let kept = if self.check(ctx, &combined, span, Site::Try) { combined } else { unit };
        (ty, kept)
    }
}
