//! Lipton-style mover effects: `B` (both mover), `L` (left mover),
//! `R` (right mover), `A` (atomic), `T` (compound, also spelled `⊤`).

use std::collections::BTreeMap;

use crate::quantale::finite::finite_system;
use crate::quantale::{EffectSystem, FiniteQuantale};

pub const B: usize = 0;
pub const L: usize = 1;
pub const R: usize = 2;
pub const A: usize = 3;
pub const T: usize = 4;

pub const NAMES: [&str; 5] = ["B", "L", "R", "A", "T"];

/// Source labels and the movers they denote.
pub const ATOMS: [(&str, usize); 5] = [
    ("local", B),
    ("release", L),
    ("acquire", R),
    ("atomic", A),
    ("compound", T),
];

pub fn quantale() -> FiniteQuantale {
    // Rows are the left operand, in the order B, L, R, A, T.
    let seq = [
        [B, L, R, A, T],
        [L, L, T, T, T],
        [R, A, R, A, T],
        [A, A, T, T, T],
        [T, T, T, T, T],
    ];
    let join = [
        [B, L, R, A, T],
        [L, L, A, A, T],
        [R, A, R, A, T],
        [A, A, A, A, T],
        [T, T, T, T, T],
    ];
    let total = |t: [[usize; 5]; 5]| t.iter().map(|row| row.iter().map(|&c| Some(c)).collect()).collect();
    let names = NAMES.iter().map(|s| s.to_string()).collect();
    let mut q = FiniteQuantale::from_tables(names, B, total(seq), total(join), None, None, false)
        .expect("atomicity tables are well-formed");
    q.add_alias("⊤", T);
    q
}

pub fn system() -> EffectSystem {
    let atoms: BTreeMap<String, usize> = ATOMS.iter().map(|&(l, e)| (l.to_string(), e)).collect();
    finite_system("atomicity", quantale(), atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequencing_table_is_exact() {
        let q = quantale();
        // Row order as printed: B, R, L, A, T; columns B, L, R, A, T.
        let printed = [
            (B, [B, L, R, A, T]),
            (R, [R, A, R, A, T]),
            (L, [L, L, T, T, T]),
            (A, [A, A, T, T, T]),
            (T, [T, T, T, T, T]),
        ];
        for (row, cells) in printed {
            for (col, want) in [B, L, R, A, T].into_iter().zip(cells) {
                assert_eq!(q.seq_ix(row, col), Some(want), "{} ▷ {}", NAMES[row], NAMES[col]);
            }
        }
    }

    #[test]
    fn lattice_is_the_printed_diamond_with_top() {
        let q = quantale();
        let below = [(B, L), (B, R), (L, A), (R, A), (A, T), (B, T)];
        for (a, b) in below {
            assert!(q.le_ix(a, b));
        }
        assert!(!q.le_ix(L, R) && !q.le_ix(R, L));
        assert_eq!(q.join_ix(L, R), Some(A));
    }

    #[test]
    fn spot_values() {
        let q = quantale();
        assert_eq!(q.seq_ix(R, L), Some(A));
        assert_eq!(q.seq_ix(B, B), Some(B));
        assert_eq!(q.residual_ix(L, A), Some(L));
        assert_eq!(q.residual_ix(A, A), Some(L));
        assert_eq!(q.residual_ix(A, L), None);
        assert_eq!(q.iter_ix(B), Some(B));
        assert_eq!(q.iter_ix(A), Some(T));
    }

    #[test]
    fn top_alias_parses() {
        let s = system();
        assert_eq!(s.parse_effect("⊤").unwrap(), s.parse_effect("T").unwrap());
        assert_eq!(s.render(&s.parse_effect("⊤").unwrap()), "T");
    }
}
