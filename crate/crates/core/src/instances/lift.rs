//! Commutative effect systems obtained by reusing a join semilattice's join
//! as sequencing.

use std::collections::BTreeMap;

use crate::quantale::finite::{finite_system, Table2};
use crate::quantale::{EffectSystem, FiniteQuantale, TableError};

/// Builds the quantale with `seq = join`, unit the bottom element, and
/// residual `X \ Y = Y` when `X ⊑ Y` (undefined otherwise).
pub fn lift_quantale(names: Vec<String>, join: Table2) -> Result<FiniteQuantale, TableError> {
    let n = names.len();
    if join.len() != n || join.iter().any(|row| row.len() != n) {
        return Err(TableError::Shape { table: "join", reason: format!("expected {n}x{n}") });
    }
    let le = |a: usize, b: usize| join[a][b] == Some(b);
    let bottom = (0..n).find(|&b| (0..n).all(|x| le(b, x))).ok_or(TableError::NoBottom)?;
    let residual: Table2 = (0..n)
        .map(|x| (0..n).map(|y| le(x, y).then_some(y)).collect())
        .collect();
    FiniteQuantale::from_tables(names, bottom, join.clone(), join, None, Some(residual), true)
}

pub fn commutative_lift(
    name: impl Into<String>,
    names: Vec<String>,
    join: Table2,
    atoms: BTreeMap<String, usize>,
) -> Result<EffectSystem, TableError> {
    Ok(finite_system(name, lift_quantale(names, join)?, atoms))
}

/// Renders a subset of `events` (given as a bitmask) as `{a,b}` with the
/// member names sorted.
pub(crate) fn set_name(events: &[String], mask: usize) -> String {
    let mut members: Vec<&str> = events
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, e)| e.as_str())
        .collect();
    members.sort_unstable();
    format!("{{{}}}", members.join(","))
}

pub(crate) const MAX_EVENTS: usize = 8;

pub(crate) fn check_events(events: &[String]) -> Result<(), TableError> {
    if events.is_empty() || events.len() > MAX_EVENTS {
        return Err(TableError::Shape {
            table: "universe",
            reason: format!("expected 1 to {MAX_EVENTS} events, got {}", events.len()),
        });
    }
    for (i, e) in events.iter().enumerate() {
        if e.is_empty() || !e.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(TableError::Shape { table: "universe", reason: format!("bad event name `{e}`") });
        }
        if events[..i].contains(e) {
            return Err(TableError::DuplicateElement(e.clone()));
        }
    }
    Ok(())
}

/// The commutative lift of the powerset of `events` under union: an effect
/// records which events may happen. Each event name is also an atom.
pub fn powerset_lift(events: &[String]) -> Result<EffectSystem, TableError> {
    check_events(events)?;
    let n = 1usize << events.len();
    let names = (0..n).map(|m| set_name(events, m)).collect();
    let join = (0..n).map(|a| (0..n).map(|b| Some(a | b)).collect()).collect();
    let atoms = events.iter().enumerate().map(|(i, e)| (e.clone(), 1usize << i)).collect();
    commutative_lift(format!("lift:{}", events.join(",")), names, join, atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_lattice_residuals() {
        let names = vec!["bot".to_string(), "top".to_string()];
        let join = vec![vec![Some(0), Some(1)], vec![Some(1), Some(1)]];
        let q = lift_quantale(names, join).unwrap();
        assert!(q.is_commutative());
        assert_eq!(q.residual_ix(0, 1), Some(1));
        assert_eq!(q.residual_ix(1, 0), None);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(q.seq_ix(a, b), q.join_ix(a, b));
            }
        }
    }

    #[test]
    fn missing_bottom_is_rejected() {
        let names = vec!["x".to_string(), "y".to_string()];
        let join = vec![vec![Some(0), None], vec![None, Some(1)]];
        assert!(matches!(lift_quantale(names, join), Err(TableError::NoBottom)));
    }

    #[test]
    fn powerset_names_and_atoms() {
        let s = powerset_lift(&["b".into(), "a".into()]).unwrap();
        let ab = s.parse_effect("{b, a}").unwrap();
        assert_eq!(s.render(&ab), "{a,b}");
        let a = s.atom("a").unwrap();
        let b = s.atom("b").unwrap();
        assert_eq!(s.seq(&a, &b).unwrap(), Some(ab));
        assert!(s.is_commutative());
    }
}
