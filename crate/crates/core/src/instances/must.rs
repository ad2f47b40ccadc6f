//! Must-effects: the set of events every execution is guaranteed to perform.
//! Ordered by reverse inclusion, so that promising more is lower.

use crate::instances::lift::{check_events, set_name};
use crate::quantale::finite::{finite_system, Table2};
use crate::quantale::{EffectSystem, FiniteQuantale, TableError};

/// `seq` is union, `join` is intersection, the unit is `{}`, and
/// `X \ Y = Y − X`.
pub fn quantale(events: &[String]) -> Result<FiniteQuantale, TableError> {
    check_events(events)?;
    let n = 1usize << events.len();
    let names = (0..n).map(|m| set_name(events, m)).collect();
    let table = |f: fn(usize, usize) -> usize| -> Table2 {
        (0..n).map(|a| (0..n).map(|b| Some(f(a, b))).collect()).collect()
    };
    FiniteQuantale::from_tables(
        names,
        0,
        table(|a, b| a | b),
        table(|a, b| a & b),
        None,
        Some(table(|x, y| y & !x)),
        false,
    )
}

pub fn system(events: &[String]) -> Result<EffectSystem, TableError> {
    let q = quantale(events)?;
    let atoms = events.iter().enumerate().map(|(i, e)| (e.clone(), 1usize << i)).collect();
    Ok(finite_system(format!("must:{}", events.join(",")), q, atoms))
}
