//! Generic law checker for partial ordered monoids with join, iteration and
//! weak residuals.
//!
//! Finite carriers are checked exhaustively over memoized operation tables;
//! infinite carriers are checked on sampled triples, augmented with derived
//! elements so that conditional laws have non-vacuous premises.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{EffectError, EffectSystem};

/// The operations a law-checkable algebra provides.
pub trait Algebra {
    type Elem: Clone + Eq + Hash;

    fn unit(&self) -> Self::Elem;
    fn seq(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Option<Self::Elem>, EffectError>;
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Option<Self::Elem>, EffectError>;
    fn le(&self, a: &Self::Elem, b: &Self::Elem) -> Result<bool, EffectError> {
        Ok(self.join(a, b)?.as_ref() == Some(b))
    }
    fn iter(&self, a: &Self::Elem) -> Result<Option<Self::Elem>, EffectError>;
    fn residual(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Option<Self::Elem>, EffectError>;
    fn render(&self, a: &Self::Elem) -> String;
}

/// Seed used for sampled law runs, so reports are reproducible.
pub const LAW_SEED: u64 = 0x005E_ED0F_1A55;

const MAX_COUNTEREXAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Law {
    Closure,
    SeqLeftUnit,
    SeqRightUnit,
    SeqAssociative,
    JoinCommutative,
    JoinAssociative,
    JoinIdempotent,
    DistribLeft,
    DistribRight,
    SeqMonotone,
    JoinMonotone,
    IterExtensive,
    IterIdempotent,
    IterMonotone,
    IterFoldable,
    IterPossiblyEmpty,
    LoopUnrolling,
    ResidualBounding,
    ResidualExistence,
    ResidualSelf,
    ResidualUnit,
    ResidualSequencing,
    ResidualShifting,
    ResidualAntitone,
}

const ALL_LAWS: [Law; 24] = [
    Law::Closure,
    Law::SeqLeftUnit,
    Law::SeqRightUnit,
    Law::SeqAssociative,
    Law::JoinCommutative,
    Law::JoinAssociative,
    Law::JoinIdempotent,
    Law::DistribLeft,
    Law::DistribRight,
    Law::SeqMonotone,
    Law::JoinMonotone,
    Law::IterExtensive,
    Law::IterIdempotent,
    Law::IterMonotone,
    Law::IterFoldable,
    Law::IterPossiblyEmpty,
    Law::LoopUnrolling,
    Law::ResidualBounding,
    Law::ResidualExistence,
    Law::ResidualSelf,
    Law::ResidualUnit,
    Law::ResidualSequencing,
    Law::ResidualShifting,
    Law::ResidualAntitone,
];

impl Law {
    fn name(self) -> &'static str {
        match self {
            Law::Closure => "closure",
            Law::SeqLeftUnit => "seq_left_unit",
            Law::SeqRightUnit => "seq_right_unit",
            Law::SeqAssociative => "seq_associative",
            Law::JoinCommutative => "join_commutative",
            Law::JoinAssociative => "join_associative",
            Law::JoinIdempotent => "join_idempotent",
            Law::DistribLeft => "distrib_left",
            Law::DistribRight => "distrib_right",
            Law::SeqMonotone => "seq_monotone",
            Law::JoinMonotone => "join_monotone",
            Law::IterExtensive => "iter_extensive",
            Law::IterIdempotent => "iter_idempotent",
            Law::IterMonotone => "iter_monotone",
            Law::IterFoldable => "iter_foldable",
            Law::IterPossiblyEmpty => "iter_possibly_empty",
            Law::LoopUnrolling => "loop_unrolling",
            Law::ResidualBounding => "residual_bounding",
            Law::ResidualExistence => "residual_existence",
            Law::ResidualSelf => "residual_self",
            Law::ResidualUnit => "residual_unit",
            Law::ResidualSequencing => "residual_sequencing",
            Law::ResidualShifting => "residual_shifting",
            Law::ResidualAntitone => "residual_antitone",
        }
    }

    fn is_iteration(self) -> bool {
        matches!(
            self,
            Law::IterExtensive
                | Law::IterIdempotent
                | Law::IterMonotone
                | Law::IterFoldable
                | Law::IterPossiblyEmpty
                | Law::LoopUnrolling
        )
    }

    fn is_lemma(self) -> bool {
        matches!(self, Law::ResidualSequencing | Law::ResidualShifting | Law::ResidualAntitone)
    }
}

/// Which optional law groups to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LawSet {
    pub iteration: bool,
    /// Derived residual properties (sequencing, shifting, antitone).
    pub lemmas: bool,
}

impl LawSet {
    pub const FULL: LawSet = LawSet { iteration: true, lemmas: true };
    /// Algebra laws, iteration and the four residual axioms only.
    pub const AXIOMS: LawSet = LawSet { iteration: true, lemmas: false };

    fn includes(self, law: Law) -> bool {
        (self.iteration || !law.is_iteration()) && (self.lemmas || !law.is_lemma())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub law: String,
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawResult {
    pub law: String,
    pub checked: u64,
    pub failed: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl LawResult {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub system: String,
    pub mode: String,
    /// Carrier size for exhaustive runs, sampled triples otherwise.
    pub size: usize,
    pub laws: Vec<LawResult>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.laws.iter().all(LawResult::passed)
    }

    pub fn failures(&self) -> u64 {
        self.laws.iter().map(|l| l.failed).sum()
    }

    pub fn law(&self, name: &str) -> Option<&LawResult> {
        self.laws.iter().find(|l| l.law == name)
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = if self.mode == "exhaustive" { "elements" } else { "sampled triples" };
        writeln!(f, "laws for {} ({}, {} {})", self.system, self.mode, self.size, unit)?;
        for l in &self.laws {
            let status = if l.passed() { "ok  " } else { "FAIL" };
            writeln!(f, "  {status} {:<22} checked {:>9}  failed {}", l.law, l.checked, l.failed)?;
            for c in &l.counterexamples {
                writeln!(f, "       counterexample: ({})", c.elements.join(", "))?;
            }
        }
        let verdict = if self.passed() { "all laws hold" } else { "some laws FAIL" };
        write!(f, "{verdict}")
    }
}

struct Recorder {
    set: LawSet,
    results: Vec<LawResult>,
}

impl Recorder {
    fn new(set: LawSet) -> Self {
        let results = ALL_LAWS
            .iter()
            .map(|l| LawResult { law: l.name().to_string(), checked: 0, failed: 0, counterexamples: vec![] })
            .collect();
        Recorder { set, results }
    }

    fn wants(&self, law: Law) -> bool {
        self.set.includes(law)
    }

    fn record(&mut self, law: Law, ok: bool, witness: impl FnOnce() -> Vec<String>) {
        let r = &mut self.results[law as usize];
        r.checked += 1;
        if !ok {
            r.failed += 1;
            if r.counterexamples.len() < MAX_COUNTEREXAMPLES {
                r.counterexamples.push(Counterexample { law: law.name().to_string(), elements: witness() });
            }
        }
    }

    fn finish(self, system: String, mode: &str, size: usize) -> LawReport {
        let set = self.set;
        let laws = ALL_LAWS
            .iter()
            .zip(self.results)
            .filter(|(l, _)| set.includes(**l))
            .filter(|(l, r)| **l != Law::Closure || r.checked > 0)
            .map(|(_, r)| r)
            .collect();
        LawReport { system, mode: mode.to_string(), size, laws }
    }
}

/// Uniform view over memoized tables and direct evaluation.
trait Ops {
    type V: Clone + PartialEq;
    fn unit(&self) -> Self::V;
    fn seq(&self, a: &Self::V, b: &Self::V) -> Result<Option<Self::V>, EffectError>;
    fn join(&self, a: &Self::V, b: &Self::V) -> Result<Option<Self::V>, EffectError>;
    fn le(&self, a: &Self::V, b: &Self::V) -> Result<bool, EffectError>;
    fn iter(&self, a: &Self::V) -> Result<Option<Self::V>, EffectError>;
    fn res(&self, a: &Self::V, b: &Self::V) -> Result<Option<Self::V>, EffectError>;
    fn name(&self, a: &Self::V) -> String;
}

struct Direct<'a, A: Algebra>(&'a A);

impl<A: Algebra> Ops for Direct<'_, A> {
    type V = A::Elem;
    fn unit(&self) -> A::Elem {
        self.0.unit()
    }
    fn seq(&self, a: &A::Elem, b: &A::Elem) -> Result<Option<A::Elem>, EffectError> {
        self.0.seq(a, b)
    }
    fn join(&self, a: &A::Elem, b: &A::Elem) -> Result<Option<A::Elem>, EffectError> {
        self.0.join(a, b)
    }
    fn le(&self, a: &A::Elem, b: &A::Elem) -> Result<bool, EffectError> {
        self.0.le(a, b)
    }
    fn iter(&self, a: &A::Elem) -> Result<Option<A::Elem>, EffectError> {
        self.0.iter(a)
    }
    fn res(&self, a: &A::Elem, b: &A::Elem) -> Result<Option<A::Elem>, EffectError> {
        self.0.residual(a, b)
    }
    fn name(&self, a: &A::Elem) -> String {
        self.0.render(a)
    }
}

struct Tables {
    n: usize,
    unit: u32,
    seq: Vec<Option<u32>>,
    join: Vec<Option<u32>>,
    le: Vec<bool>,
    iter: Vec<Option<u32>>,
    res: Vec<Option<u32>>,
    names: Vec<String>,
}

impl Ops for Tables {
    type V = u32;
    fn unit(&self) -> u32 {
        self.unit
    }
    fn seq(&self, a: &u32, b: &u32) -> Result<Option<u32>, EffectError> {
        Ok(self.seq[*a as usize * self.n + *b as usize])
    }
    fn join(&self, a: &u32, b: &u32) -> Result<Option<u32>, EffectError> {
        Ok(self.join[*a as usize * self.n + *b as usize])
    }
    fn le(&self, a: &u32, b: &u32) -> Result<bool, EffectError> {
        Ok(self.le[*a as usize * self.n + *b as usize])
    }
    fn iter(&self, a: &u32) -> Result<Option<u32>, EffectError> {
        Ok(self.iter[*a as usize])
    }
    fn res(&self, a: &u32, b: &u32) -> Result<Option<u32>, EffectError> {
        Ok(self.res[*a as usize * self.n + *b as usize])
    }
    fn name(&self, a: &u32) -> String {
        self.names[*a as usize].clone()
    }
}

fn names<O: Ops>(o: &O, xs: &[&O::V]) -> Vec<String> {
    xs.iter().map(|x| o.name(x)).collect()
}

fn opt_le<O: Ops>(o: &O, a: &Option<O::V>, b: &O::V) -> Result<bool, EffectError> {
    match a {
        Some(a) => o.le(a, b),
        None => Ok(false),
    }
}

fn unary<O: Ops>(o: &O, rec: &mut Recorder, x: &O::V) -> Result<(), EffectError> {
    let u = o.unit();
    let ok = o.seq(&u, x)?.as_ref() == Some(x);
    rec.record(Law::SeqLeftUnit, ok, || names(o, &[x]));
    let ok = o.seq(x, &u)?.as_ref() == Some(x);
    rec.record(Law::SeqRightUnit, ok, || names(o, &[x]));
    let ok = o.join(x, x)?.as_ref() == Some(x);
    rec.record(Law::JoinIdempotent, ok, || names(o, &[x]));

    if rec.wants(Law::IterExtensive) {
        if let Some(ix) = o.iter(x)? {
            let ok = o.le(x, &ix)?;
            rec.record(Law::IterExtensive, ok, || names(o, &[x]));
            let ok = o.iter(&ix)?.as_ref() == Some(&ix);
            rec.record(Law::IterIdempotent, ok, || names(o, &[x]));
            let ok = opt_le(o, &o.seq(&ix, &ix)?, &ix)?;
            rec.record(Law::IterFoldable, ok, || names(o, &[x]));
            let ok = o.le(&u, &ix)?;
            rec.record(Law::IterPossiblyEmpty, ok, || names(o, &[x]));
            let mut power = Some(u.clone());
            for _ in 0..=4 {
                let ok = opt_le(o, &power, &ix)?;
                rec.record(Law::LoopUnrolling, ok, || names(o, &[x]));
                power = match power {
                    Some(p) => o.seq(&p, x)?,
                    None => None,
                };
            }
        }
    }

    let ok = o.res(x, x)?.is_some();
    rec.record(Law::ResidualSelf, ok, || names(o, &[x]));
    let ok = o.res(&u, x)?.as_ref() == Some(x);
    rec.record(Law::ResidualUnit, ok, || names(o, &[x]));
    Ok(())
}

fn pair<O: Ops>(o: &O, rec: &mut Recorder, x: &O::V, y: &O::V) -> Result<(), EffectError> {
    let ok = o.join(x, y)? == o.join(y, x)?;
    rec.record(Law::JoinCommutative, ok, || names(o, &[x, y]));

    if rec.wants(Law::IterMonotone) && o.le(x, y)? {
        if let Some(iy) = o.iter(y)? {
            let ok = opt_le(o, &o.iter(x)?, &iy)?;
            rec.record(Law::IterMonotone, ok, || names(o, &[x, y]));
        }
    }

    if rec.wants(Law::ResidualSequencing) {
        if let Some(r) = o.res(x, y)? {
            let ok = opt_le(o, &o.seq(x, &r)?, y)?;
            rec.record(Law::ResidualSequencing, ok, || names(o, &[x, y]));
        }
    }
    Ok(())
}

fn triple<O: Ops>(o: &O, rec: &mut Recorder, x: &O::V, y: &O::V, z: &O::V) -> Result<(), EffectError> {
    let xy = o.seq(x, y)?;
    let lhs = match &xy {
        Some(xy) => o.seq(xy, z)?,
        None => None,
    };
    let rhs = match o.seq(y, z)? {
        Some(yz) => o.seq(x, &yz)?,
        None => None,
    };
    rec.record(Law::SeqAssociative, lhs == rhs, || names(o, &[x, y, z]));

    let lhs = match o.join(x, y)? {
        Some(j) => o.join(&j, z)?,
        None => None,
    };
    let yz_join = o.join(y, z)?;
    let rhs = match &yz_join {
        Some(j) => o.join(x, j)?,
        None => None,
    };
    rec.record(Law::JoinAssociative, lhs == rhs, || names(o, &[x, y, z]));

    let lhs = match &yz_join {
        Some(j) => o.seq(x, j)?,
        None => None,
    };
    let rhs = match (&xy, o.seq(x, z)?) {
        (Some(a), Some(b)) => o.join(a, &b)?,
        _ => None,
    };
    rec.record(Law::DistribLeft, lhs == rhs, || names(o, &[x, y, z]));

    let lhs = match &yz_join {
        Some(j) => o.seq(j, x)?,
        None => None,
    };
    let yx = o.seq(y, x)?;
    let rhs = match (&yx, o.seq(z, x)?) {
        (Some(a), Some(b)) => o.join(a, &b)?,
        _ => None,
    };
    rec.record(Law::DistribRight, lhs == rhs, || names(o, &[x, y, z]));

    let yz_res = o.res(y, z)?;
    if let Some(r) = &yz_res {
        if o.le(x, r)? {
            let ok = opt_le(o, &yx, z)?;
            rec.record(Law::ResidualBounding, ok, || names(o, &[x, y, z]));
        }
    }
    if let Some(s) = &yx {
        if o.le(s, z)? {
            rec.record(Law::ResidualExistence, yz_res.is_some(), || names(o, &[x, y, z]));
        }
    }

    if rec.wants(Law::ResidualShifting) {
        if let Some(xy) = &xy {
            let direct = o.res(xy, z)?.is_some();
            let shifted = match o.res(x, z)? {
                Some(r) => o.res(y, &r)?.is_some(),
                None => false,
            };
            rec.record(Law::ResidualShifting, direct == shifted, || names(o, &[x, y, z]));
        }
        if yz_res.is_some() && o.le(x, y)? {
            let ok = o.res(x, z)?.is_some();
            rec.record(Law::ResidualAntitone, ok, || names(o, &[x, y, z]));
        }
    }
    Ok(())
}

/// Monotonicity of seq and join, for `a ⊑ b` and `x ⊑ y`.
fn mono<O: Ops>(o: &O, rec: &mut Recorder, a: &O::V, b: &O::V, x: &O::V, y: &O::V) -> Result<(), EffectError> {
    if let Some(by) = o.seq(b, y)? {
        let ok = opt_le(o, &o.seq(a, x)?, &by)?;
        rec.record(Law::SeqMonotone, ok, || names(o, &[a, b, x, y]));
    }
    if let Some(by) = o.join(b, y)? {
        let ok = opt_le(o, &o.join(a, x)?, &by)?;
        rec.record(Law::JoinMonotone, ok, || names(o, &[a, b, x, y]));
    }
    Ok(())
}

/// Exhaustive check over an explicitly enumerated carrier. Results that
/// fall outside the enumeration are reported under the `closure` law and
/// treated as undefined.
pub fn check_exhaustive<A: Algebra>(
    alg: &A,
    name: &str,
    elements: &[A::Elem],
    set: LawSet,
) -> Result<LawReport, EffectError> {
    let n = elements.len();
    let index: HashMap<&A::Elem, u32> = elements.iter().enumerate().map(|(i, e)| (e, i as u32)).collect();
    let mut rec = Recorder::new(set);
    let names: Vec<String> = elements.iter().map(|e| alg.render(e)).collect();

    let lookup = |r: Option<A::Elem>, op: &str, args: &[usize], rec: &mut Recorder| -> Option<u32> {
        let r = r?;
        match index.get(&r) {
            Some(&i) => Some(i),
            None => {
                rec.record(Law::Closure, false, || {
                    let mut w: Vec<String> = args.iter().map(|&a| names[a].clone()).collect();
                    w.push(format!("{op} = {}", alg.render(&r)));
                    w
                });
                None
            }
        }
    };

    let unit = lookup(Some(alg.unit()), "unit", &[], &mut rec);
    let Some(unit) = unit else {
        return Ok(rec.finish(name.to_string(), "exhaustive", n));
    };
    let mut t = Tables {
        n,
        unit,
        seq: Vec::with_capacity(n * n),
        join: Vec::with_capacity(n * n),
        le: Vec::with_capacity(n * n),
        iter: Vec::with_capacity(n),
        res: Vec::with_capacity(n * n),
        names: names.clone(),
    };
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&elements[i], &elements[j]);
            let s = alg.seq(a, b)?;
            t.seq.push(lookup(s, "seq", &[i, j], &mut rec));
            let jn = alg.join(a, b)?;
            t.join.push(lookup(jn, "join", &[i, j], &mut rec));
            t.le.push(alg.le(a, b)?);
            let r = alg.residual(a, b)?;
            t.res.push(lookup(r, "residual", &[i, j], &mut rec));
        }
        let it = if set.iteration { alg.iter(&elements[i])? } else { None };
        t.iter.push(lookup(it, "iter", &[i], &mut rec));
    }

    let all: Vec<u32> = (0..n as u32).collect();
    for x in &all {
        unary(&t, &mut rec, x)?;
        for y in &all {
            pair(&t, &mut rec, x, y)?;
            for z in &all {
                triple(&t, &mut rec, x, y, z)?;
            }
        }
    }
    let comparable: Vec<(u32, u32)> = all
        .iter()
        .flat_map(|&a| all.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| t.le[a as usize * n + b as usize])
        .collect();
    for (a, b) in &comparable {
        for (x, y) in &comparable {
            mono(&t, &mut rec, a, b, x, y)?;
        }
    }
    Ok(rec.finish(name.to_string(), "exhaustive", n))
}

/// Checks the laws on the given triples, plus elements derived from them
/// (joins, sequences, residuals) so that the conditional laws get exercised.
pub fn check_sampled<A: Algebra>(
    alg: &A,
    name: &str,
    triples: &[(A::Elem, A::Elem, A::Elem)],
    set: LawSet,
) -> Result<LawReport, EffectError> {
    let o = Direct(alg);
    let mut rec = Recorder::new(set);
    for (x, y, z) in triples {
        for e in [x, y, z] {
            unary(&o, &mut rec, e)?;
        }
        pair(&o, &mut rec, x, y)?;
        pair(&o, &mut rec, y, x)?;
        let xy_join = alg.join(x, y)?;
        let xy_seq = alg.seq(x, y)?;
        if let Some(j) = &xy_join {
            pair(&o, &mut rec, x, j)?;
        }
        if let Some(s) = &xy_seq {
            pair(&o, &mut rec, x, s)?;
        }

        triple(&o, &mut rec, x, y, z)?;
        if let Some(yx) = alg.seq(y, x)? {
            if let Some(z2) = alg.join(&yx, z)? {
                triple(&o, &mut rec, x, y, &z2)?;
            }
        }
        if let Some(r) = alg.residual(y, z)? {
            triple(&o, &mut rec, &r, y, z)?;
        }
        if let Some(s) = &xy_seq {
            if let Some(z3) = alg.seq(s, z)? {
                triple(&o, &mut rec, x, y, &z3)?;
            }
        }
        if let Some(j) = &xy_join {
            triple(&o, &mut rec, x, j, z)?;
        }

        if let (Some(b), Some(w)) = (&xy_join, alg.join(z, y)?) {
            mono(&o, &mut rec, x, b, z, &w)?;
            mono(&o, &mut rec, z, &w, x, b)?;
        }
    }
    Ok(rec.finish(name.to_string(), "sampled", triples.len()))
}

/// Law check for an effect system: exhaustive when the carrier is finite,
/// otherwise over `budget` seeded random triples.
pub fn check_laws(system: &EffectSystem, budget: usize) -> Result<LawReport, EffectError> {
    if let Some(elements) = system.elements() {
        return check_exhaustive(system, system.name(), &elements, LawSet::FULL);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(LAW_SEED);
    let mut triples = Vec::with_capacity(budget);
    for _ in 0..budget {
        let mut draw = || system.sample(&mut rng);
        match (draw(), draw(), draw()) {
            (Some(x), Some(y), Some(z)) => triples.push((x, y, z)),
            _ => break,
        }
    }
    check_sampled(system, system.name(), &triples, LawSet::FULL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{atomicity, lift, must, pmonad, reentrancy, trace};
    use crate::quantale::finite::finite_system;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn assert_clean(r: &LawReport) {
        assert!(r.passed(), "{r}");
        for law in ["seq_associative", "residual_bounding", "residual_existence", "distrib_left"] {
            assert!(r.law(law).is_some_and(|l| l.checked > 0), "{law} never checked\n{r}");
        }
    }

    #[test]
    fn finite_instances_satisfy_all_laws() {
        let systems = [
            atomicity::system(),
            reentrancy::system(),
            must::system(&names(&["a", "b", "c"])).unwrap(),
            pmonad::system(&names(&["s1", "s2", "s3"])).unwrap(),
            lift::powerset_lift(&names(&["x", "y"])).unwrap(),
        ];
        for s in &systems {
            assert_clean(&check_laws(s, 0).unwrap());
        }
    }

    #[test]
    fn trace_sample_satisfies_all_laws() {
        let s = trace::system(&names(&["a", "b"])).unwrap();
        let r = check_laws(&s, 60).unwrap();
        assert_eq!(r.mode, "sampled");
        assert_clean(&r);
    }

    #[test]
    fn corrupted_seq_cell_breaks_associativity() {
        let mut q = atomicity::quantale();
        q.set_seq(atomicity::R, atomicity::L, Some(atomicity::R));
        let s = finite_system("broken", q, Default::default());
        let r = check_laws(&s, 0).unwrap();
        let assoc = r.law("seq_associative").unwrap();
        assert!(assoc.failed > 0);
        assert_eq!(assoc.counterexamples[0].elements.len(), 3);
        assert!(!r.passed());
    }
}
