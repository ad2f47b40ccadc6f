//! Independent recomputation of the earliest failing position.
//!
//! Walks a function body in evaluation order using only the base system's
//! `seq`, `join`, `iter` and `le`. At every construct that contributes its
//! own effect it composes the prefix from scratch and asks whether *some*
//! carrier element could follow it within the bound, by searching the whole
//! carrier. No residual operation of the system, and nothing from the
//! checkers, is used.

use crate::quantale::{Effect, EffectError, EffectSystem};
use crate::syntax::resolve::{Function, RExpr, RKind};
use crate::syntax::span::Span;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("the oracle needs a finite carrier")]
    Infinite,
    #[error("construct outside the enumerated fragment at {0:?}")]
    Unsupported(Span),
    #[error(transparent)]
    Effect(#[from] EffectError),
}

enum Stop {
    At(Span),
    Err(OracleError),
}

impl From<EffectError> for Stop {
    fn from(e: EffectError) -> Self {
        Stop::Err(e.into())
    }
}

struct Walk<'a> {
    sys: &'a EffectSystem,
    carrier: Vec<Effect>,
}

/// The first position at which the function fails: a construct whose
/// prefix has no possible continuation within its bound (or whose effect
/// cannot be formed), a lambda whose body exceeds its latent effect, or the
/// function's name when only the final bound check fails. `None` when the
/// function is accepted.
pub fn earliest_failure(sys: &EffectSystem, f: &Function) -> Result<Option<Span>, OracleError> {
    let carrier = sys.elements().ok_or(OracleError::Infinite)?;
    let w = Walk { sys, carrier };
    let bound = &f.sig.effect;
    match w.eval(&f.body, &sys.unit(), bound) {
        Ok(total) => Ok(if sys.le(&total, bound)? { None } else { Some(f.name_span) }),
        Err(Stop::At(s)) => Ok(Some(s)),
        Err(Stop::Err(e)) => Err(e),
    }
}

/// The body effect the oracle computes, when no position fails.
pub fn total_effect(sys: &EffectSystem, f: &Function) -> Result<Option<Effect>, OracleError> {
    let carrier = sys.elements().ok_or(OracleError::Infinite)?;
    let w = Walk { sys, carrier };
    match w.eval(&f.body, &sys.unit(), &f.sig.effect) {
        Ok(t) => Ok(Some(t)),
        Err(Stop::At(_)) => Ok(None),
        Err(Stop::Err(e)) => Err(e),
    }
}

impl Walk<'_> {
    /// `∃ r. x ▷ r ⊑ z`, by exhaustive search.
    fn completable(&self, x: &Effect, z: &Effect) -> Result<bool, EffectError> {
        for r in &self.carrier {
            if let Some(xr) = self.sys.seq(x, r)? {
                if self.sys.le(&xr, z)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn seq(&self, a: &Effect, b: &Effect, at: Span) -> Result<Effect, Stop> {
        self.sys.seq(a, b)?.ok_or(Stop::At(at))
    }

    /// Checks the position `at`, whose own effect is `eff`, after `before`.
    fn position(&self, before: &Effect, eff: &Effect, bound: &Effect, at: Span) -> Result<(), Stop> {
        let p = self.seq(before, eff, at)?;
        if self.completable(&p, bound)? {
            Ok(())
        } else {
            Err(Stop::At(at))
        }
    }

    /// Returns the effect of `e`, run after `before` inside a body bounded
    /// by `bound`.
    fn eval(&self, e: &RExpr, before: &Effect, bound: &Effect) -> Result<Effect, Stop> {
        let sys = self.sys;
        match &e.kind {
            RKind::Const(_) | RKind::Var(_) => Ok(sys.unit()),
            RKind::Perform { effect, .. } => {
                self.position(before, effect, bound, e.span)?;
                Ok(effect.clone())
            }
            RKind::Seq(a, b) => {
                let ea = self.eval(a, before, bound)?;
                let mid = self.seq(before, &ea, a.span)?;
                let eb = self.eval(b, &mid, bound)?;
                self.seq(&ea, &eb, e.span)
            }
            RKind::If { cond, then, els } => {
                let ec = self.eval(cond, before, bound)?;
                let mid = self.seq(before, &ec, cond.span)?;
                let et = self.eval(then, &mid, bound)?;
                let ef = match els {
                    Some(f) => self.eval(f, &mid, bound)?,
                    None => sys.unit(),
                };
                let j = sys.join(&et, &ef)?.ok_or(Stop::At(e.span))?;
                self.position(&mid, &j, bound, e.span)?;
                self.seq(&ec, &j, e.span)
            }
            RKind::While { cond, body, header, .. } => {
                let ec = self.eval(cond, before, bound)?;
                let mid = self.seq(before, &ec, cond.span)?;
                let eb = self.eval(body, &mid, bound)?;
                let round = self.seq(&eb, &ec, *header)?;
                let star = sys.iter(&round)?.ok_or(Stop::At(*header))?;
                self.position(&mid, &star, bound, *header)?;
                self.seq(&ec, &star, *header)
            }
            RKind::App { fun, arg } => {
                let RKind::Lambda { latent, body, .. } = &fun.kind else {
                    return Err(Stop::Err(OracleError::Unsupported(e.span)));
                };
                let inner = self.eval(body, &sys.unit(), latent)?;
                if !sys.le(&inner, latent)? {
                    return Err(Stop::At(fun.span));
                }
                let ea = self.eval(arg, before, bound)?;
                let mid = self.seq(before, &ea, arg.span)?;
                self.position(&mid, latent, bound, e.span)?;
                self.seq(&ea, latent, e.span)
            }
            _ => Err(Stop::Err(OracleError::Unsupported(e.span))),
        }
    }
}
