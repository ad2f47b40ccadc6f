//! Differential run of the two checkers and the earliest-failure oracle
//! over every enumerated program.

use std::fmt;

use serde::Serialize;

use super::earliest::{earliest_failure, total_effect, OracleError};
use super::enumerate::{enumerate_programs, Enumerated};
use crate::checker::{early_check, global_check, CheckOptions, Fault};
use crate::quantale::EffectSystem;
use crate::syntax::span::LineIndex;

/// Divergences kept verbatim in a report; the count is always exact.
pub const MAX_LISTED: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct Divergence {
    pub reason: String,
    pub source: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub system: String,
    pub max_nodes: usize,
    pub programs: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub completability_checks: usize,
    pub completability_violations: usize,
    pub divergence_count: usize,
    pub divergences: Vec<Divergence>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.divergence_count == 0 && self.completability_violations == 0
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system {} (max {} nodes): {} programs", self.system, self.max_nodes, self.programs)?;
        writeln!(f, "  accepted {}, rejected {}", self.accepted, self.rejected)?;
        writeln!(
            f,
            "  completability: {} checks, {} violations",
            self.completability_checks, self.completability_violations
        )?;
        writeln!(f, "  divergences: {}", self.divergence_count)?;
        for d in &self.divergences {
            writeln!(f, "  - {}", d.reason)?;
            for line in d.source.lines() {
                writeln!(f, "      {line}")?;
            }
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

#[derive(Default)]
struct Partial {
    accepted: usize,
    rejected: usize,
    completability_checks: usize,
    completability_violations: usize,
    divergences: Vec<Divergence>,
}

fn compare(sys: &EffectSystem, item: &Enumerated, opts: &CheckOptions, acc: &mut Partial) -> Result<(), OracleError> {
    let prog = &item.program;
    let global = global_check(sys, prog);
    let (early, stats) = early_check(sys, prog, opts);
    acc.completability_checks += stats.completability_checks;
    acc.completability_violations += stats.completability_violations;
    let idx = LineIndex::new(&item.source);
    let at = |s: crate::syntax::Span| {
        let lc = idx.line_col(s.start);
        format!("{}:{}", lc.line, lc.col)
    };
    let mut diverge = |reason: String| acc.divergences.push(Divergence { reason, source: item.source.clone() });
    for ((f, g), e) in prog.functions.iter().zip(&global).zip(&early) {
        match (g.accepted(), e.accepted()) {
            (true, true) => {
                if g.effect != e.effect || g.ty != e.ty {
                    diverge(format!("`{}`: accepted by both with different results", f.name));
                }
                let oracle = total_effect(sys, f)?;
                if oracle.as_ref() != e.effect.as_ref().and_then(|c| c.normal.as_ref()) {
                    diverge(format!("`{}`: oracle effect differs from the checkers'", f.name));
                }
                acc.accepted += 1;
            }
            (false, false) => acc.rejected += 1,
            (ga, ea) => {
                diverge(format!(
                    "`{}`: global {} but early {}",
                    f.name,
                    if ga { "accepts" } else { "rejects" },
                    if ea { "accepts" } else { "rejects" }
                ));
                continue;
            }
        }
        let want = earliest_failure(sys, f)?;
        let got = e.diagnostics.first().map(|d| d.span);
        if want != got {
            let show = |s: Option<crate::syntax::Span>| s.map_or("none".to_string(), &at);
            diverge(format!("`{}`: first diagnostic at {}, oracle says {}", f.name, show(got), show(want)));
        }
    }
    Ok(())
}

/// Runs both checkers (and the oracle) on every program of at most
/// `max_nodes` body nodes. `fault` plants a bug in the early checker.
pub fn equivalence_run(sys: &EffectSystem, max_nodes: usize, fault: Option<Fault>) -> Result<EquivalenceReport, OracleError> {
    if !sys.is_finite() {
        return Err(OracleError::Infinite);
    }
    let items = enumerate_programs(sys, max_nodes);
    let opts = CheckOptions { fault, verify_completability: true };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    let chunk = items.len().div_ceil(threads).max(1);
    let parts: Vec<Result<Partial, OracleError>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let opts = &opts;
                s.spawn(move || {
                    let mut acc = Partial::default();
                    for item in c {
                        compare(sys, item, opts, &mut acc)?;
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut report = EquivalenceReport {
        system: sys.name().to_string(),
        max_nodes,
        programs: items.len(),
        accepted: 0,
        rejected: 0,
        completability_checks: 0,
        completability_violations: 0,
        divergence_count: 0,
        divergences: Vec::new(),
    };
    for p in parts {
        let p = p?;
        report.accepted += p.accepted;
        report.rejected += p.rejected;
        report.completability_checks += p.completability_checks;
        report.completability_violations += p.completability_violations;
        report.divergence_count += p.divergences.len();
        for d in p.divergences {
            if report.divergences.len() < MAX_LISTED {
                report.divergences.push(d);
            }
        }
    }
    Ok(report)
}
