//! Brute-force word semantics for regular expressions, used to cross-check
//! the automaton-based trace operations on short words.

use std::collections::BTreeSet;

use crate::instances::trace::Regex;

pub type Word = Vec<usize>;

/// All words over `k` symbols of length at most `n`, shortest first.
pub fn words_upto(k: usize, n: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for a in 0..k {
                let mut v = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Membership by direct structural recursion over the expression.
pub fn matches(r: &Regex, w: &[usize]) -> bool {
    match r {
        Regex::Empty => false,
        Regex::Epsilon => w.is_empty(),
        Regex::Sym(a) => w == [*a],
        Regex::Alt(a, b) => matches(a, w) || matches(b, w),
        Regex::Cat(a, b) => (0..=w.len()).any(|i| matches(a, &w[..i]) && matches(b, &w[i..])),
        Regex::Star(a) => w.is_empty() || (1..=w.len()).any(|i| matches(a, &w[..i]) && matches(r, &w[i..])),
    }
}

/// The words of length at most `n` in the language of `r`.
pub fn language(r: &Regex, k: usize, n: usize) -> BTreeSet<Word> {
    words_upto(k, n).into_iter().filter(|w| matches(r, w)).collect()
}

/// Whether the language of `r` is finite, judged syntactically: no star
/// over an expression that matches a non-empty word.
pub fn is_finite(r: &Regex) -> bool {
    match r {
        Regex::Empty | Regex::Epsilon | Regex::Sym(_) => true,
        Regex::Alt(a, b) | Regex::Cat(a, b) => is_finite(a) && is_finite(b),
        Regex::Star(a) => !nonempty_word(a),
    }
}

fn nonempty_word(r: &Regex) -> bool {
    match r {
        Regex::Empty | Regex::Epsilon => false,
        Regex::Sym(_) => true,
        Regex::Alt(a, b) => nonempty_word(a) || nonempty_word(b),
        Regex::Cat(a, b) => (nonempty_word(a) && !is_empty(b)) || (nonempty_word(b) && !is_empty(a)),
        Regex::Star(a) => nonempty_word(a),
    }
}

fn is_empty(r: &Regex) -> bool {
    match r {
        Regex::Empty => true,
        Regex::Epsilon | Regex::Sym(_) | Regex::Star(_) => false,
        Regex::Alt(a, b) => is_empty(a) && is_empty(b),
        Regex::Cat(a, b) => is_empty(a) || is_empty(b),
    }
}

/// Longest word an expression with a finite language can match.
pub fn max_len(r: &Regex) -> usize {
    match r {
        Regex::Empty | Regex::Epsilon => 0,
        Regex::Sym(_) => 1,
        Regex::Alt(a, b) => max_len(a).max(max_len(b)),
        Regex::Cat(a, b) => max_len(a) + max_len(b),
        Regex::Star(_) => 0,
    }
}

/// `w` is in the left quotient `x \ y` restricted to the given prefixes:
/// every `u` in `prefixes` gives `u·w ∈ y`.
pub fn in_quotient(prefixes: &BTreeSet<Word>, y: &Regex, w: &[usize]) -> bool {
    prefixes.iter().all(|u| {
        let mut uw = u.clone();
        uw.extend_from_slice(w);
        matches(y, &uw)
    })
}
