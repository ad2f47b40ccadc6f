//! Complete deterministic automata in canonical minimal form.
//!
//! Every constructor returns a minimized automaton whose states are numbered
//! in breadth-first order from the start state (state 0), visiting symbols in
//! alphabet order. Two automata over the same alphabet are therefore equal
//! exactly when they accept the same language.

use std::collections::{HashMap, VecDeque};

use crate::quantale::EffectError;

/// Default bound on the number of states any construction may create.
pub const DEFAULT_STATE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dfa {
    k: usize,
    trans: Vec<u32>,
    accept: Vec<bool>,
}

/// Nondeterministic automaton with ε-moves, used as an intermediate form.
#[derive(Debug, Clone, Default)]
pub struct Nfa {
    pub(crate) k: usize,
    pub(crate) eps: Vec<Vec<u32>>,
    pub(crate) trans: Vec<Vec<(usize, u32)>>,
    pub(crate) accept: Vec<bool>,
    pub(crate) start: u32,
}

impl Nfa {
    pub fn new(k: usize) -> Self {
        Nfa { k, ..Default::default() }
    }

    pub fn add_state(&mut self, accepting: bool) -> u32 {
        self.eps.push(Vec::new());
        self.trans.push(Vec::new());
        self.accept.push(accepting);
        (self.accept.len() - 1) as u32
    }

    pub fn add_eps(&mut self, from: u32, to: u32) {
        self.eps[from as usize].push(to);
    }

    pub fn add_edge(&mut self, from: u32, sym: usize, to: u32) {
        self.trans[from as usize].push((sym, to));
    }

    /// Copies `d` into this automaton; returns the state offset.
    fn embed(&mut self, d: &Dfa) -> u32 {
        let base = self.accept.len() as u32;
        for q in 0..d.states() {
            self.add_state(d.accept[q]);
        }
        for q in 0..d.states() {
            for a in 0..d.k {
                self.add_edge(base + q as u32, a, base + d.next(q, a) as u32);
            }
        }
        base
    }

    fn closure(&self, set: &mut Vec<u32>) {
        let mut stack = set.clone();
        let mut seen = vec![false; self.accept.len()];
        for &q in set.iter() {
            seen[q as usize] = true;
        }
        while let Some(q) = stack.pop() {
            for &r in &self.eps[q as usize] {
                if !seen[r as usize] {
                    seen[r as usize] = true;
                    set.push(r);
                    stack.push(r);
                }
            }
        }
        set.sort_unstable();
        set.dedup();
    }

    /// Subset construction followed by minimization.
    pub fn determinize(&self, limit: usize) -> Result<Dfa, EffectError> {
        let mut start = vec![self.start];
        self.closure(&mut start);
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut sets = vec![start.clone()];
        ids.insert(start, 0);
        let mut trans = Vec::new();
        let mut accept = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let set = sets[i].clone();
            accept.push(set.iter().any(|&q| self.accept[q as usize]));
            for a in 0..self.k {
                let mut next: Vec<u32> = set
                    .iter()
                    .flat_map(|&q| self.trans[q as usize].iter().filter(|(s, _)| *s == a).map(|&(_, r)| r))
                    .collect();
                self.closure(&mut next);
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        if sets.len() >= limit {
                            return Err(EffectError::StateLimit { limit });
                        }
                        let id = sets.len() as u32;
                        ids.insert(next.clone(), id);
                        sets.push(next);
                        id
                    }
                };
                trans.push(id);
            }
            i += 1;
        }
        Ok(Dfa { k: self.k, trans, accept }.minimize())
    }
}

impl Dfa {
    /// Builds from raw tables (state 0 is the start state) and canonicalizes.
    pub fn from_parts(k: usize, trans: Vec<u32>, accept: Vec<bool>) -> Dfa {
        assert_eq!(trans.len(), k * accept.len(), "transition table shape");
        Dfa { k, trans, accept }.minimize()
    }

    pub fn empty(k: usize) -> Dfa {
        Dfa { k, trans: vec![0; k], accept: vec![false] }
    }

    /// The language `{ε}`.
    pub fn epsilon(k: usize) -> Dfa {
        let mut trans = vec![1; k];
        trans.extend(vec![1; k]);
        Dfa { k, trans, accept: vec![true, false] }
    }

    /// The language of one word.
    pub fn word(k: usize, w: &[usize]) -> Dfa {
        let n = w.len() + 2;
        let dead = (n - 1) as u32;
        let mut trans = vec![dead; n * k];
        for (i, &a) in w.iter().enumerate() {
            trans[i * k + a] = (i + 1) as u32;
        }
        let mut accept = vec![false; n];
        accept[w.len()] = true;
        Dfa::from_parts(k, trans, accept)
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn states(&self) -> usize {
        self.accept.len()
    }

    pub fn next(&self, q: usize, a: usize) -> usize {
        self.trans[q * self.k + a] as usize
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accept[q]
    }

    pub fn accepts(&self, w: &[usize]) -> bool {
        let q = w.iter().fold(0, |q, &a| self.next(q, a));
        self.accept[q]
    }

    /// Canonical automata have only reachable states, so emptiness is the
    /// absence of accepting states.
    pub fn is_empty(&self) -> bool {
        !self.accept.iter().any(|&a| a)
    }

    /// Whether the language is finite: no cycle through a co-reachable state.
    pub fn is_finite(&self) -> bool {
        let live = self.live_states();
        let n = self.states();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark = vec![0u8; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for root in 0..n {
            if !live[root] || mark[root] != 0 {
                continue;
            }
            stack.push((root, 0));
            mark[root] = 1;
            while let Some((q, a)) = stack.pop() {
                if a == self.k {
                    mark[q] = 2;
                    continue;
                }
                stack.push((q, a + 1));
                let r = self.next(q, a);
                if !live[r] {
                    continue;
                }
                match mark[r] {
                    0 => {
                        mark[r] = 1;
                        stack.push((r, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            }
        }
        true
    }

    /// States from which some accepting state is reachable.
    pub fn live_states(&self) -> Vec<bool> {
        let n = self.states();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for q in 0..n {
            for a in 0..self.k {
                rev[self.next(q, a)].push(q);
            }
        }
        let mut live = self.accept.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&q| live[q]).collect();
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !live[p] {
                    live[p] = true;
                    stack.push(p);
                }
            }
        }
        live
    }

    /// Moore partition refinement, then breadth-first renumbering.
    fn minimize(self) -> Dfa {
        let k = self.k;
        // Reachable states only.
        let mut reach = vec![false; self.states()];
        let mut order = vec![0usize];
        reach[0] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for a in 0..k {
                let r = self.next(q, a);
                if !reach[r] {
                    reach[r] = true;
                    order.push(r);
                }
            }
            i += 1;
        }
        let mut class: Vec<u32> = vec![0; self.states()];
        for &q in &order {
            class[q] = self.accept[q] as u32;
        }
        let mut count = 0;
        loop {
            let mut sig_ids: HashMap<Vec<u32>, u32> = HashMap::new();
            let mut next_class = vec![0u32; self.states()];
            for &q in &order {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[q]);
                sig.extend((0..k).map(|a| class[self.next(q, a)]));
                let fresh = sig_ids.len() as u32;
                next_class[q] = *sig_ids.entry(sig).or_insert(fresh);
            }
            let new_count = sig_ids.len();
            class = next_class;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // Renumber classes breadth-first from the start class.
        let mut rep: Vec<Option<usize>> = vec![None; count];
        for &q in &order {
            rep[class[q] as usize].get_or_insert(q);
        }
        let mut number: Vec<Option<u32>> = vec![None; count];
        let mut queue = VecDeque::from([class[0] as usize]);
        number[class[0] as usize] = Some(0);
        let mut seq = Vec::new();
        while let Some(c) = queue.pop_front() {
            seq.push(c);
            let q = rep[c].expect("class has a member");
            for a in 0..k {
                let d = class[self.next(q, a)] as usize;
                if number[d].is_none() {
                    number[d] = Some(seq.len() as u32 + queue.len() as u32);
                    queue.push_back(d);
                }
            }
        }
        let mut trans = Vec::with_capacity(seq.len() * k);
        let mut accept = Vec::with_capacity(seq.len());
        for &c in &seq {
            let q = rep[c].expect("class has a member");
            accept.push(self.accept[q]);
            for a in 0..k {
                trans.push(number[class[self.next(q, a)] as usize].expect("numbered"));
            }
        }
        Dfa { k, trans, accept }
    }

    /// Product automaton with the given acceptance combination.
    fn product(&self, other: &Dfa, limit: usize, f: impl Fn(bool, bool) -> bool) -> Result<Dfa, EffectError> {
        let k = self.k;
        let mut ids: HashMap<(usize, usize), u32> = HashMap::from([((0, 0), 0)]);
        let mut pairs = vec![(0usize, 0usize)];
        let mut trans = Vec::new();
        let mut accept = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            accept.push(f(self.accept[p], other.accept[q]));
            for a in 0..k {
                let key = (self.next(p, a), other.next(q, a));
                let id = match ids.get(&key) {
                    Some(&id) => id,
                    None => {
                        if pairs.len() >= limit {
                            return Err(EffectError::StateLimit { limit });
                        }
                        let id = pairs.len() as u32;
                        ids.insert(key, id);
                        pairs.push(key);
                        id
                    }
                };
                trans.push(id);
            }
            i += 1;
        }
        Ok(Dfa { k, trans, accept }.minimize())
    }

    pub fn union(&self, other: &Dfa, limit: usize) -> Result<Dfa, EffectError> {
        self.product(other, limit, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Dfa, limit: usize) -> Result<Dfa, EffectError> {
        self.product(other, limit, |a, b| a && b)
    }

    pub fn concat(&self, other: &Dfa, limit: usize) -> Result<Dfa, EffectError> {
        let mut n = Nfa::new(self.k);
        let a = n.embed(self);
        let b = n.embed(other);
        for q in 0..self.states() {
            if self.accept[q] {
                n.accept[a as usize + q] = false;
                n.add_eps(a + q as u32, b);
            }
        }
        n.start = a;
        n.determinize(limit)
    }

    pub fn star(&self, limit: usize) -> Result<Dfa, EffectError> {
        let mut n = Nfa::new(self.k);
        let s = n.add_state(true);
        let a = n.embed(self);
        n.add_eps(s, a);
        for q in 0..self.states() {
            if self.accept[q] {
                n.add_eps(a + q as u32, a);
            }
        }
        n.start = s;
        n.determinize(limit)
    }

    /// Language inclusion.
    pub fn is_subset(&self, other: &Dfa) -> bool {
        let mut seen = std::collections::HashSet::from([(0usize, 0usize)]);
        let mut stack = vec![(0usize, 0usize)];
        while let Some((p, q)) = stack.pop() {
            if self.accept[p] && !other.accept[q] {
                return false;
            }
            for a in 0..self.k {
                let next = (self.next(p, a), other.next(q, a));
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        true
    }

    /// `{ w | ∀x ∈ self. x·w ∈ target }`, or `None` when that language is
    /// empty.
    pub fn residual(&self, target: &Dfa, limit: usize) -> Result<Option<Dfa>, EffectError> {
        // Target states reached by some word of `self`.
        let mut seen = std::collections::HashSet::from([(0usize, 0usize)]);
        let mut stack = vec![(0usize, 0usize)];
        let mut reached = vec![false; target.states()];
        while let Some((p, q)) = stack.pop() {
            if self.accept[p] {
                reached[q] = true;
            }
            for a in 0..self.k {
                let next = (self.next(p, a), target.next(q, a));
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        let start: Vec<u32> = (0..target.states()).filter(|&q| reached[q]).map(|q| q as u32).collect();
        if start.is_empty() {
            // `self` is empty; outside the carrier.
            return Ok(None);
        }
        // Vector automaton: a state is a set of target states, accepting
        // when all members accept.
        let k = self.k;
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::from([(start.clone(), 0)]);
        let mut sets = vec![start];
        let mut trans = Vec::new();
        let mut accept = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let set = sets[i].clone();
            accept.push(set.iter().all(|&q| target.accept[q as usize]));
            for a in 0..k {
                let mut next: Vec<u32> = set.iter().map(|&q| target.next(q as usize, a) as u32).collect();
                next.sort_unstable();
                next.dedup();
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        if sets.len() >= limit {
                            return Err(EffectError::StateLimit { limit });
                        }
                        let id = sets.len() as u32;
                        ids.insert(next.clone(), id);
                        sets.push(next);
                        id
                    }
                };
                trans.push(id);
            }
            i += 1;
        }
        let d = Dfa { k, trans, accept }.minimize();
        Ok((!d.is_empty()).then_some(d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIM: usize = DEFAULT_STATE_LIMIT;

    #[test]
    fn canonical_forms_coincide() {
        let ab = Dfa::word(2, &[0, 1]);
        let a = Dfa::word(2, &[0]);
        let b = Dfa::word(2, &[1]);
        assert_eq!(a.concat(&b, LIM).unwrap(), ab);
        let eps = Dfa::epsilon(2);
        assert_eq!(eps.concat(&ab, LIM).unwrap(), ab);
        assert_eq!(ab.union(&ab, LIM).unwrap(), ab);
        assert_eq!(eps.star(LIM).unwrap(), eps);
    }

    #[test]
    fn star_accepts_repetitions() {
        let s = Dfa::word(2, &[0]).star(LIM).unwrap();
        assert!(s.accepts(&[]) && s.accepts(&[0, 0, 0]));
        assert!(!s.accepts(&[1]));
        assert!(!s.is_finite());
        assert!(Dfa::word(2, &[0, 1]).is_finite());
    }

    #[test]
    fn residual_of_words() {
        let a = Dfa::word(3, &[0]);
        let abac = Dfa::word(3, &[0, 1]).union(&Dfa::word(3, &[0, 2]), LIM).unwrap();
        let bc = Dfa::word(3, &[1]).union(&Dfa::word(3, &[2]), LIM).unwrap();
        assert_eq!(a.residual(&abac, LIM).unwrap(), Some(bc));
        assert_eq!(a.residual(&Dfa::word(3, &[1]), LIM).unwrap(), None);
    }

    #[test]
    fn state_limit_is_a_hard_error() {
        let d = Dfa::word(2, &[0, 1, 0, 1, 1]);
        assert_eq!(d.star(3), Err(EffectError::StateLimit { limit: 3 }));
    }
}
