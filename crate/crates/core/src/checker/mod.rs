//! Effect checking of resolved programs.
//!
//! [`global`] is the plain bottom-up judgment: it synthesizes each
//! function's effect and compares it with the declared bound once, at the
//! end. [`early`] threads the remaining budget `χ0 \ χm` through the body
//! and performs one residual check per construct, reporting a violation at
//! the first construct after which no completion can stay within bounds.

use crate::control::{ControlAlgebra, ControlEffect, ControlTag};
use crate::diagnostic::{Diagnostic, Kind};
use crate::quantale::{EffectError, EffectSystem};
use crate::syntax::resolve::{ResolvedProgram, Signature, Ty};
use crate::syntax::span::{LineIndex, Span};
use crate::syntax::{parse, resolve};

pub mod early;
pub mod global;

pub use early::{early_check, CheckOptions, CheckStats, Fault};
pub use global::global_check;

/// Result of checking one function.
#[derive(Debug, Clone)]
pub struct FunctionOutcome {
    pub name: String,
    /// Body type, when the body type-checked.
    pub ty: Option<Ty>,
    /// Synthesized body effect with early returns folded in; present only
    /// when the function was accepted.
    pub effect: Option<ControlEffect>,
    pub diagnostics: Vec<Diagnostic>,
}

impl FunctionOutcome {
    pub fn accepted(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

pub(crate) fn effect_error(span: Span, e: EffectError) -> Diagnostic {
    Diagnostic::new(Kind::SystemError, span, e.to_string())
}

/// The effect charged at a call site: the callee's bound on normal
/// completion plus its declared exceptional prefixes.
pub(crate) fn callee_effect(alg: &ControlAlgebra, sig: &Signature, span: Span) -> Result<ControlEffect, Diagnostic> {
    let entries = sig.throws.iter().map(|(x, e, _)| (ControlTag::Exception(*x), e.clone())).collect();
    let c = ControlEffect::from_parts(Some(sig.effect.clone()), entries).expect("distinct exceptions");
    normalize(alg, &c, span)
}

/// The budget `χm` for a function body: the bound, every declared
/// exceptional prefix, and early returns under the bound.
pub(crate) fn function_target(alg: &ControlAlgebra, sig: &Signature, span: Span) -> Result<ControlEffect, Diagnostic> {
    let mut entries: Vec<_> = sig.throws.iter().map(|(x, e, _)| (ControlTag::Exception(*x), e.clone())).collect();
    entries.push((ControlTag::Return, sig.effect.clone()));
    let c = ControlEffect::from_parts(Some(sig.effect.clone()), entries).expect("distinct tags");
    normalize(alg, &c, span)
}

pub(crate) fn normalize(alg: &ControlAlgebra, c: &ControlEffect, span: Span) -> Result<ControlEffect, Diagnostic> {
    use crate::control::NormalizeError;
    if alg.poset.is_empty() {
        return Ok(c.clone());
    }
    alg.normalize_subtyping(c).map_err(|e| match e {
        NormalizeError::UndefinedJoin { .. } => Diagnostic::new(Kind::UndefinedJoin, span, e.to_string()),
        NormalizeError::Effect(e) => effect_error(span, e),
    })
}

/// Renders the normal part and exception entries; loop and return
/// bookkeeping is left out.
pub(crate) fn render_brief(alg: &ControlAlgebra, c: &ControlEffect) -> String {
    let kept: Vec<_> = c.controls().iter().filter(|(t, _)| matches!(t, ControlTag::Exception(_))).cloned().collect();
    match ControlEffect::from_parts(c.normal.clone(), kept) {
        Some(c) => alg.render(&c),
        None => "none".to_string(),
    }
}

/// Checks a completed body effect (returns already folded in) against a
/// bound and the declared exceptional prefixes.
pub(crate) fn end_check(
    alg: &ControlAlgebra,
    what: &str,
    body: &ControlEffect,
    bound: &ControlEffect,
    span: Span,
) -> Vec<Diagnostic> {
    let sys = alg.sys;
    let mut out = Vec::new();
    let render = |c: &ControlEffect| render_brief(alg, c);
    if let (Some(n), Some(b)) = (&body.normal, &bound.normal) {
        match sys.le(n, b) {
            Ok(true) => {}
            Ok(false) => out.push(
                Diagnostic::new(
                    Kind::BoundExceeded,
                    span,
                    format!("{what} has effect {} which exceeds its declared bound {}", sys.render(n), sys.render(b)),
                )
                .with_effects(render(body), render(bound)),
            ),
            Err(e) => out.push(effect_error(span, e)),
        }
    }
    for (t, p) in body.controls() {
        let ControlTag::Exception(x) = t else { continue };
        let declared: Vec<_> = bound.controls().iter().filter(|(u, _)| alg.poset.le(*t, *u)).collect();
        if declared.is_empty() {
            out.push(
                Diagnostic::new(
                    Kind::UncaughtException,
                    span,
                    format!("{what} may throw `{}`, which it does not declare", alg.poset.name(*x)),
                )
                .with_effects(render(body), render(bound)),
            );
            continue;
        }
        let mut ok = false;
        for (_, q) in &declared {
            match sys.le(p, q) {
                Ok(true) => ok = true,
                Ok(false) => {}
                Err(e) => {
                    out.push(effect_error(span, e));
                    ok = true;
                }
            }
        }
        if !ok {
            out.push(
                Diagnostic::new(
                    Kind::BoundExceeded,
                    span,
                    format!(
                        "{what} may throw `{}` after effect {}, which exceeds the declared bound for it",
                        alg.poset.name(*x),
                        sys.render(p)
                    ),
                )
                .with_effects(render(body), render(bound)),
            );
        }
    }
    out
}

/// Parses, resolves and early-checks a source file. Diagnostics come back
/// sorted by position.
pub fn check_source(sys: &EffectSystem, src: &str) -> Vec<Diagnostic> {
    let prog = match parse(src) {
        Ok(p) => p,
        Err(errs) => {
            return errs.into_iter().map(|e| Diagnostic::new(Kind::SyntaxError, e.span, e.message)).collect();
        }
    };
    let resolved = match resolve(&prog, sys) {
        Ok(r) => r,
        Err(diags) => return diags,
    };
    check_resolved(sys, &resolved)
}

pub fn check_resolved(sys: &EffectSystem, prog: &ResolvedProgram) -> Vec<Diagnostic> {
    let (outcomes, _) = early_check(sys, prog, &CheckOptions::default());
    let mut diags: Vec<Diagnostic> = outcomes.into_iter().flat_map(|o| o.diagnostics).collect();
    diags.sort_by_key(|d| (d.span.start, d.span.end));
    diags
}

/// Convenience for tests and the FFI: the 1-based line of each diagnostic.
pub fn diagnostic_lines(src: &str, diags: &[Diagnostic]) -> Vec<usize> {
    let idx = LineIndex::new(src);
    diags.iter().map(|d| idx.line_col(d.span.start).line).collect()
}

#[cfg(test)]
mod tests;
