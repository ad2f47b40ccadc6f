//! The standard judgment `Γ ⊢ e : τ | χ`: bottom-up synthesis, with the
//! declared bound consulted only once the whole body is known. Stops at the
//! first problem in each function.

use crate::control::{ControlAlgebra, ControlEffect, ControlTag};
use crate::diagnostic::{Diagnostic, Kind};
use crate::quantale::{Effect, EffectSystem};
use crate::syntax::ast::Const;
use crate::syntax::resolve::{Function, RExpr, RKind, ResolvedProgram, Ty};
use crate::syntax::span::Span;

use super::{callee_effect, effect_error, end_check, function_target, normalize, FunctionOutcome};

type Res<T> = Result<T, Diagnostic>;

pub fn global_check(sys: &EffectSystem, prog: &ResolvedProgram) -> Vec<FunctionOutcome> {
    let alg = ControlAlgebra::new(sys, &prog.poset);
    let g = Global { alg, prog };
    prog.functions.iter().map(|f| g.function(f)).collect()
}

struct Global<'a> {
    alg: ControlAlgebra<'a>,
    prog: &'a ResolvedProgram,
}

/// Where `return` goes: a declared function's result type, or a lambda's
/// result type as inferred so far.
enum RetSlot {
    Declared(Ty),
    Lambda(Ty),
}

pub(crate) fn const_ty(c: Const) -> Ty {
    match c {
        Const::Unit => Ty::Unit,
        Const::Bool(_) => Ty::Bool,
        Const::Int(_) => Ty::Int,
    }
}

impl Global<'_> {
    fn function(&self, f: &Function) -> FunctionOutcome {
        let mut out = FunctionOutcome { name: f.name.clone(), ty: None, effect: None, diagnostics: Vec::new() };
        match self.function_inner(f) {
            Ok((ty, eff)) => {
                out.ty = Some(ty);
                out.effect = Some(eff);
            }
            Err(d) => out.diagnostics.push(d),
        }
        out
    }

    fn function_inner(&self, f: &Function) -> Res<(Ty, ControlEffect)> {
        let target = function_target(&self.alg, &f.sig, f.name_span)?;
        let mut env: Vec<(String, Ty)> = f.sig.params.clone();
        let mut ret = RetSlot::Declared(f.sig.ret.clone());
        let (ty, eff) = self.synth(&mut env, &mut ret, &f.body)?;
        if !ty.fits(&f.sig.ret) {
            return Err(Diagnostic::new(
                Kind::TypeMismatch,
                f.body.span,
                format!(
                    "body of `{}` has type {}, expected {}",
                    f.name,
                    ty.render(self.alg.sys),
                    f.sig.ret.render(self.alg.sys)
                ),
            ));
        }
        let flat = self.flatten(&eff, ControlTag::Return, f.name_span)?;
        let what = format!("function `{}`", f.name);
        if let Some(d) = end_check(&self.alg, &what, &flat, &target, f.name_span).into_iter().next() {
            return Err(d);
        }
        Ok((ty, flat))
    }

    fn flatten(&self, c: &ControlEffect, tag: ControlTag, span: Span) -> Res<ControlEffect> {
        match self.alg.flatten(c, &[tag]).map_err(|e| effect_error(span, e))? {
            Some(f) => Ok(f),
            None => Err(Diagnostic::new(
                Kind::UndefinedJoin,
                span,
                format!("jumps to `{}` have no common effect with normal completion", self.alg.poset.tag_name(tag)),
            )),
        }
    }

    fn seq(&self, a: &ControlEffect, b: &ControlEffect, span: Span) -> Res<ControlEffect> {
        match self.alg.seq(a, b).map_err(|e| effect_error(span, e))? {
            Some(c) => normalize(&self.alg, &c, span),
            None => Err(Diagnostic::new(
                Kind::UndefinedSeq,
                span,
                format!("{} cannot be followed by {}", self.render(a), self.render(b)),
            )),
        }
    }

    fn join(&self, a: &ControlEffect, b: &ControlEffect, span: Span) -> Res<ControlEffect> {
        match self.alg.join(a, b).map_err(|e| effect_error(span, e))? {
            Some(c) => normalize(&self.alg, &c, span),
            None => Err(Diagnostic::new(
                Kind::UndefinedJoin,
                span,
                format!("branches with effects {} and {} have no common bound", self.render(a), self.render(b)),
            )),
        }
    }

    fn render(&self, c: &ControlEffect) -> String {
        super::render_brief(&self.alg, c)
    }

    fn lift(&self, e: &Effect) -> ControlEffect {
        self.alg.lift(e.clone())
    }

    fn expect_ty(&self, got: &Ty, want: &Ty, span: Span, what: &str) -> Res<()> {
        if got.fits(want) {
            Ok(())
        } else {
            let sys = self.alg.sys;
            Err(Diagnostic::new(
                Kind::TypeMismatch,
                span,
                format!("{what} has type {}, expected {}", got.render(sys), want.render(sys)),
            ))
        }
    }

    fn synth(&self, env: &mut Vec<(String, Ty)>, ret: &mut RetSlot, e: &RExpr) -> Res<(Ty, ControlEffect)> {
        let unit = self.alg.unit();
        match &e.kind {
            RKind::Var(x) => match env.iter().rev().find(|(n, _)| n == x) {
                Some((_, t)) => Ok((t.clone(), unit)),
                None => Err(Diagnostic::new(Kind::UnboundVar, e.span, format!("unbound variable `{x}`"))),
            },
            RKind::Const(c) => Ok((const_ty(*c), unit)),
            RKind::Lambda { param, ty, latent, body } => {
                env.push((param.clone(), ty.clone()));
                let mut slot = RetSlot::Lambda(Ty::Never);
                let r = self.synth(env, &mut slot, body);
                env.pop();
                let (bty, beff) = r?;
                let RetSlot::Lambda(rty) = slot else { unreachable!() };
                let Some(rty) = bty.unify(&rty) else {
                    return Err(Diagnostic::new(
                        Kind::TypeMismatch,
                        body.span,
                        "lambda body and its `return`s have different types",
                    ));
                };
                let rty = if rty == Ty::Never { Ty::Unit } else { rty };
                let flat = self.flatten(&beff, ControlTag::Return, e.span)?;
                let bound = ControlEffect::from_parts(Some(latent.clone()), Vec::new()).expect("no entries");
                if let Some(d) = end_check(&self.alg, "lambda", &flat, &bound, e.span).into_iter().next() {
                    return Err(d);
                }
                Ok((Ty::Fn(Box::new(ty.clone()), Box::new(rty), latent.clone()), unit))
            }
            RKind::App { fun, arg } => {
                let (fty, c1) = self.synth(env, ret, fun)?;
                let (aty, c2) = self.synth(env, ret, arg)?;
                let Ty::Fn(p, r, latent) = fty else {
                    return Err(Diagnostic::new(
                        Kind::NotAFunction,
                        fun.span,
                        format!("applied expression has type {}", fty.render(self.alg.sys)),
                    ));
                };
                self.expect_ty(&aty, &p, arg.span, "argument")?;
                let c = self.seq(&c1, &c2, e.span)?;
                let c = self.seq(&c, &self.lift(&latent), e.span)?;
                Ok((*r, c))
            }
            RKind::Call { func, args } => {
                let callee = &self.prog.functions[*func];
                let mut c = unit;
                for (a, (_, pty)) in args.iter().zip(&callee.sig.params) {
                    let (aty, ca) = self.synth(env, ret, a)?;
                    self.expect_ty(&aty, pty, a.span, "argument")?;
                    c = self.seq(&c, &ca, e.span)?;
                }
                let latent = callee_effect(&self.alg, &callee.sig, e.span)?;
                let c = self.seq(&c, &latent, e.span)?;
                Ok((callee.sig.ret.clone(), c))
            }
            RKind::If { cond, then, els } => {
                let (cty, cc) = self.synth(env, ret, cond)?;
                self.expect_ty(&cty, &Ty::Bool, cond.span, "condition")?;
                let (tty, ct) = self.synth(env, ret, then)?;
                let (fty, cf) = match els {
                    Some(x) => self.synth(env, ret, x)?,
                    None => (Ty::Unit, unit),
                };
                let ty = if els.is_none() {
                    Ty::Unit
                } else {
                    tty.unify(&fty).ok_or_else(|| {
                        Diagnostic::new(
                            Kind::TypeMismatch,
                            e.span,
                            format!(
                                "branches have types {} and {}",
                                tty.render(self.alg.sys),
                                fty.render(self.alg.sys)
                            ),
                        )
                    })?
                };
                let branches = self.join(&ct, &cf, e.span)?;
                Ok((ty, self.seq(&cc, &branches, e.span)?))
            }
            RKind::While { cond, body, header, id } => {
                let (cty, cc) = self.synth(env, ret, cond)?;
                self.expect_ty(&cty, &Ty::Bool, cond.span, "condition")?;
                let (_, cb) = self.synth(env, ret, body)?;
                let round = self.seq(&cb, &cc, e.span)?;
                let Some(star) = self.alg.iter(&round).map_err(|x| effect_error(*header, x))? else {
                    return Err(Diagnostic::new(
                        Kind::UndefinedIter,
                        *header,
                        format!("loop iteration {} has no iterated effect", self.render(&round)),
                    ));
                };
                let star = self.flatten(&star, ControlTag::Break(*id), *header)?;
                Ok((Ty::Unit, self.seq(&cc, &star, e.span)?))
            }
            RKind::Seq(a, b) => {
                let (_, ca) = self.synth(env, ret, a)?;
                let (ty, cb) = self.synth(env, ret, b)?;
                Ok((ty, self.seq(&ca, &cb, e.span)?))
            }
            RKind::Let { name, value, body } => {
                let (vty, cv) = self.synth(env, ret, value)?;
                env.push((name.clone(), vty));
                let r = self.synth(env, ret, body);
                env.pop();
                let (ty, cb) = r?;
                Ok((ty, self.seq(&cv, &cb, e.span)?))
            }
            RKind::Perform { effect, .. } => Ok((Ty::Unit, self.lift(effect))),
            RKind::Throw(x) => Ok((Ty::Never, self.alg.jump(ControlTag::Exception(*x)))),
            RKind::Break(id) => Ok((Ty::Never, self.alg.jump(ControlTag::Break(*id)))),
            RKind::Return(v) => {
                let (vty, cv) = match v {
                    Some(v) => self.synth(env, ret, v)?,
                    None => (Ty::Unit, unit),
                };
                match ret {
                    RetSlot::Declared(want) => self.expect_ty(&vty, want, e.span, "returned value")?,
                    RetSlot::Lambda(so_far) => {
                        *so_far = so_far.unify(&vty).ok_or_else(|| {
                            Diagnostic::new(Kind::TypeMismatch, e.span, "`return`s in a lambda have different types")
                        })?;
                    }
                }
                Ok((Ty::Never, self.seq(&cv, &self.alg.jump(ControlTag::Return), e.span)?))
            }
            RKind::Try { body, catches } => {
                let (mut ty, cb) = self.synth(env, ret, body)?;
                let mut handlers = Vec::new();
                for c in catches {
                    let (hty, ch) = self.synth(env, ret, &c.body)?;
                    ty = ty.unify(&hty).ok_or_else(|| {
                        Diagnostic::new(Kind::TypeMismatch, c.span, "handler type differs from the protected block")
                    })?;
                    handlers.push((c.exception, ch));
                }
                match self.alg.handle(&cb, &handlers).map_err(|x| effect_error(e.span, x))? {
                    Some(c) => Ok((ty, normalize(&self.alg, &c, e.span)?)),
                    None => Err(Diagnostic::new(
                        Kind::UndefinedJoin,
                        e.span,
                        "handled and unhandled paths have no common effect",
                    )),
                }
            }
        }
    }
}
