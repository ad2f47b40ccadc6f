//! Critical-section effects for non-reentrant operations.

use std::collections::BTreeMap;

use crate::quantale::finite::finite_system;
use crate::quantale::{EffectSystem, FiniteQuantale};

pub const LOCKING: usize = 0;
pub const UNLOCKING: usize = 1;
pub const CRITICAL: usize = 2;
pub const ENTRANT: usize = 3;
pub const EPSILON: usize = 4;

pub const NAMES: [&str; 5] = ["locking", "unlocking", "critical", "entrant", "epsilon"];

pub const ATOMS: [(&str, usize); 5] = [
    ("begin", LOCKING),
    ("end", UNLOCKING),
    ("critical", CRITICAL),
    ("entrant", ENTRANT),
    ("noop", EPSILON),
];

pub fn quantale() -> FiniteQuantale {
    let (lk, ul, cr, en, ep) = (Some(LOCKING), Some(UNLOCKING), Some(CRITICAL), Some(ENTRANT), Some(EPSILON));
    let seq = vec![
        vec![None, en, lk, None, lk],
        vec![cr, None, None, ul, ul],
        vec![None, ul, cr, None, cr],
        vec![lk, None, None, en, en],
        vec![lk, ul, cr, en, ep],
    ];
    let mut join = vec![vec![None; 5]; 5];
    for i in 0..5 {
        join[i][i] = Some(i);
    }
    for top in [CRITICAL, ENTRANT] {
        join[EPSILON][top] = Some(top);
        join[top][EPSILON] = Some(top);
    }
    let names = NAMES.iter().map(|s| s.to_string()).collect();
    let mut q = FiniteQuantale::from_tables(names, EPSILON, seq, join, None, None, false)
        .expect("reentrancy tables are well-formed");
    q.add_alias("ε", EPSILON);
    q
}

pub fn system() -> EffectSystem {
    let atoms: BTreeMap<String, usize> = ATOMS.iter().map(|&(l, e)| (l.to_string(), e)).collect();
    finite_system("reentrancy", quantale(), atoms)
}
