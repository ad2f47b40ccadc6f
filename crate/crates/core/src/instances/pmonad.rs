//! Parameterized-monad effects: state transitions `(pre,post)` over a
//! declared set of states, plus a polymorphic identity `id`.

use std::collections::BTreeMap;

use crate::quantale::finite::{finite_system, Table2};
use crate::quantale::{EffectSystem, FiniteQuantale, TableError};

pub const ID: usize = 0;

/// Carrier index of the pair `(x,y)` over `n` states.
pub fn pair(n: usize, x: usize, y: usize) -> usize {
    1 + x * n + y
}

fn unpair(n: usize, i: usize) -> Option<(usize, usize)> {
    (i != ID).then(|| ((i - 1) / n, (i - 1) % n))
}

/// `(x,y) ▷ (y,z) = (x,z)`; join is discrete except that `id ⊑ (x,x)`;
/// `(x,y) \ (x,z) = (y,z)`.
pub fn quantale(states: &[String]) -> Result<FiniteQuantale, TableError> {
    crate::instances::lift::check_events(states)?;
    let n = states.len();
    let size = 1 + n * n;
    let mut names = vec!["id".to_string()];
    for x in states {
        for y in states {
            names.push(format!("({x},{y})"));
        }
    }
    let build = |f: &dyn Fn(usize, usize) -> Option<usize>| -> Table2 {
        (0..size).map(|a| (0..size).map(|b| f(a, b)).collect()).collect()
    };
    let seq = build(&|a, b| match (unpair(n, a), unpair(n, b)) {
        (None, _) => Some(b),
        (_, None) => Some(a),
        (Some((x, y)), Some((y2, z))) => (y == y2).then(|| pair(n, x, z)),
    });
    let join = build(&|a, b| {
        if a == b {
            return Some(a);
        }
        match (unpair(n, a), unpair(n, b)) {
            (None, Some((x, y))) | (Some((x, y)), None) if x == y => Some(pair(n, x, y)),
            _ => None,
        }
    });
    let residual = build(&|a, b| match (unpair(n, a), unpair(n, b)) {
        (None, _) => Some(b),
        (Some(_), None) => None,
        (Some((x, y)), Some((x2, z))) => (x == x2).then(|| pair(n, y, z)),
    });
    FiniteQuantale::from_tables(names, ID, seq, join, None, Some(residual), false)
}

/// Atoms are `s1_to_s2` for every ordered pair of states.
pub fn system(states: &[String]) -> Result<EffectSystem, TableError> {
    let q = quantale(states)?;
    let n = states.len();
    let mut atoms = BTreeMap::new();
    for (x, sx) in states.iter().enumerate() {
        for (y, sy) in states.iter().enumerate() {
            atoms.insert(format!("{sx}_to_{sy}"), pair(n, x, y));
        }
    }
    Ok(finite_system(format!("pmonad:{}", states.join(",")), q, atoms))
}
