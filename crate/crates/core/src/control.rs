//! Effects for non-local control: exceptions, loop breaks and early returns.
//!
//! A [`ControlEffect`] pairs an optional *normal* effect (absent when every
//! path jumps away) with a prefix effect per control tag: the behavior up to
//! the point of the throw, break or return.

use std::fmt;

use crate::quantale::{Algebra, Effect, EffectError, EffectSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExcId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoopId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlTag {
    Exception(ExcId),
    Break(LoopId),
    Return,
}

/// Declared exceptions with single-parent subtyping. Break and return tags
/// are related only to themselves.
#[derive(Debug, Clone, Default)]
pub struct TagPoset {
    names: Vec<String>,
    parents: Vec<Option<ExcId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PosetError {
    #[error("exception `{0}` is declared twice")]
    Duplicate(String),
    #[error("unknown parent exception `{0}`")]
    UnknownParent(String),
}

impl TagPoset {
    pub fn new() -> Self {
        Self::default()
    }

    /// A poset of `n` unrelated exceptions named `E0`, `E1`, ...
    pub fn discrete(n: usize) -> Self {
        let mut p = Self::new();
        for i in 0..n {
            p.declare(&format!("E{i}"), None).expect("fresh names");
        }
        p
    }

    /// Declares an exception. Parents must already be declared, which rules
    /// out cycles.
    pub fn declare(&mut self, name: &str, parent: Option<&str>) -> Result<ExcId, PosetError> {
        if self.lookup(name).is_some() {
            return Err(PosetError::Duplicate(name.to_string()));
        }
        let parent = match parent {
            Some(p) => Some(self.lookup(p).ok_or_else(|| PosetError::UnknownParent(p.to_string()))?),
            None => None,
        };
        self.names.push(name.to_string());
        self.parents.push(parent);
        Ok(ExcId(self.names.len() as u32 - 1))
    }

    pub fn lookup(&self, name: &str) -> Option<ExcId> {
        self.names.iter().position(|n| n == name).map(|i| ExcId(i as u32))
    }

    pub fn name(&self, e: ExcId) -> &str {
        &self.names[e.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn parent(&self, e: ExcId) -> Option<ExcId> {
        self.parents[e.0 as usize]
    }

    /// Strict ancestors, nearest first.
    pub fn ancestors(&self, e: ExcId) -> Vec<ExcId> {
        let mut out = Vec::new();
        let mut cur = self.parent(e);
        while let Some(p) = cur {
            out.push(p);
            cur = self.parent(p);
        }
        out
    }

    /// Depth in the hierarchy; roots have depth 0.
    pub fn depth(&self, e: ExcId) -> usize {
        self.ancestors(e).len()
    }

    /// `t ≤ u`: equal, or `t` is a subtype of `u`.
    pub fn le(&self, t: ControlTag, u: ControlTag) -> bool {
        match (t, u) {
            (ControlTag::Exception(a), ControlTag::Exception(b)) => a == b || self.ancestors(a).contains(&b),
            _ => t == u,
        }
    }

    pub fn tag_name(&self, t: ControlTag) -> String {
        match t {
            ControlTag::Exception(e) => self.name(e).to_string(),
            ControlTag::Break(l) => format!("break#{}", l.0),
            ControlTag::Return => "return".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ControlEffect {
    pub normal: Option<Effect>,
    /// Sorted by tag, at most one entry per tag.
    controls: Vec<(ControlTag, Effect)>,
}

impl ControlEffect {
    pub fn controls(&self) -> &[(ControlTag, Effect)] {
        &self.controls
    }

    pub fn get(&self, t: ControlTag) -> Option<&Effect> {
        self.controls.iter().find(|(u, _)| *u == t).map(|(_, e)| e)
    }

    pub fn has_controls(&self) -> bool {
        !self.controls.is_empty()
    }

    /// Builds from unsorted entries; duplicate tags are rejected by
    /// returning `None`.
    pub fn from_parts(normal: Option<Effect>, mut controls: Vec<(ControlTag, Effect)>) -> Option<Self> {
        controls.sort_by_key(|(t, _)| *t);
        if controls.windows(2).any(|w| w[0].0 == w[1].0) {
            return None;
        }
        Some(ControlEffect { normal, controls })
    }
}

/// The exception construction over one base system and tag poset.
#[derive(Debug)]
pub struct ControlAlgebra<'a> {
    pub sys: &'a EffectSystem,
    pub poset: &'a TagPoset,
}

type R<T> = Result<Option<T>, EffectError>;

impl<'a> ControlAlgebra<'a> {
    pub fn new(sys: &'a EffectSystem, poset: &'a TagPoset) -> Self {
        ControlAlgebra { sys, poset }
    }

    pub fn lift(&self, e: Effect) -> ControlEffect {
        ControlEffect { normal: Some(e), controls: Vec::new() }
    }

    pub fn unit(&self) -> ControlEffect {
        self.lift(self.sys.unit())
    }

    /// The effect of jumping with `tag` right away.
    pub fn jump(&self, tag: ControlTag) -> ControlEffect {
        ControlEffect { normal: None, controls: vec![(tag, self.sys.unit())] }
    }

    /// Union of entry lists, joining prefixes that share a tag.
    fn merge(&self, a: &[(ControlTag, Effect)], b: &[(ControlTag, Effect)]) -> R<Vec<(ControlTag, Effect)>> {
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j].clone());
                j += 1;
            } else {
                let Some(p) = self.sys.join(&a[i].1, &b[j].1)? else {
                    return Ok(None);
                };
                out.push((a[i].0, p));
                i += 1;
                j += 1;
            }
        }
        Ok(Some(out))
    }

    /// `χ ▷ X`: extends every prefix on the left.
    fn extend(&self, chi: &Effect, xs: &[(ControlTag, Effect)]) -> R<Vec<(ControlTag, Effect)>> {
        let mut out = Vec::with_capacity(xs.len());
        for (t, p) in xs {
            match self.sys.seq(chi, p)? {
                Some(q) => out.push((*t, q)),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    pub fn seq(&self, a: &ControlEffect, b: &ControlEffect) -> R<ControlEffect> {
        let Some(chi) = &a.normal else {
            return Ok(Some(a.clone()));
        };
        let Some(ext) = self.extend(chi, &b.controls)? else {
            return Ok(None);
        };
        let Some(controls) = self.merge(&a.controls, &ext)? else {
            return Ok(None);
        };
        let normal = match &b.normal {
            None => None,
            Some(n) => match self.sys.seq(chi, n)? {
                Some(x) => Some(x),
                None => return Ok(None),
            },
        };
        Ok(Some(ControlEffect { normal, controls }))
    }

    pub fn join(&self, a: &ControlEffect, b: &ControlEffect) -> R<ControlEffect> {
        let normal = match (&a.normal, &b.normal) {
            (Some(x), Some(y)) => match self.sys.join(x, y)? {
                Some(j) => Some(j),
                None => return Ok(None),
            },
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        };
        Ok(self.merge(&a.controls, &b.controls)?.map(|controls| ControlEffect { normal, controls }))
    }

    pub fn le(&self, a: &ControlEffect, b: &ControlEffect) -> Result<bool, EffectError> {
        Ok(self.join(a, b)?.as_ref() == Some(b))
    }

    /// `(χ, X)* = (χ*, χ* ▷ X)`; a body that never finishes normally
    /// iterates as `(I, X)`.
    pub fn iter(&self, a: &ControlEffect) -> R<ControlEffect> {
        let Some(chi) = &a.normal else {
            return Ok(Some(ControlEffect { normal: Some(self.sys.unit()), controls: a.controls.clone() }));
        };
        let Some(star) = self.sys.iter(chi)? else {
            return Ok(None);
        };
        Ok(self
            .extend(&star, &a.controls)?
            .map(|controls| ControlEffect { normal: Some(star), controls }))
    }

    /// Weak residual with every control entry of `sofar` subject to the
    /// prefix check. See [`Self::residual_excluding`].
    pub fn residual(&self, sofar: &ControlEffect, target: &ControlEffect) -> R<ControlEffect> {
        self.residual_excluding(sofar, target, &[])
    }

    /// Weak residual `sofar \ target`.
    ///
    /// When `sofar` has a normal effect `χ`, the result is
    /// `(χ \ target.normal, { (t, χ \ p) | (t, p) ∈ target, defined })`.
    /// It is defined when every control entry of `sofar` (other than tags in
    /// `handled`) is bounded by a target entry with a tag at least as
    /// general, and some continuation remains: either the normal residual or
    /// one of the control residuals exists.
    ///
    /// When every path of `sofar` has already jumped, any continuation is
    /// dead code; the residual is then the unit, subject to the same check
    /// on control entries.
    pub fn residual_excluding(
        &self,
        sofar: &ControlEffect,
        target: &ControlEffect,
        handled: &[ControlTag],
    ) -> R<ControlEffect> {
        for (t, p) in &sofar.controls {
            if handled.contains(t) {
                continue;
            }
            let mut bounded = false;
            for (u, q) in &target.controls {
                if self.poset.le(*t, *u) && self.sys.le(p, q)? {
                    bounded = true;
                    break;
                }
            }
            if !bounded {
                return Ok(None);
            }
        }
        let Some(chi) = &sofar.normal else {
            return Ok(Some(self.unit()));
        };
        let normal = match &target.normal {
            Some(z) => self.sys.residual(chi, z)?,
            None => None,
        };
        let mut controls = Vec::new();
        for (u, q) in &target.controls {
            if let Some(r) = self.sys.residual(chi, q)? {
                controls.push((*u, r));
            }
        }
        if normal.is_none() && controls.is_empty() {
            return Ok(None);
        }
        Ok(Some(ControlEffect { normal, controls }))
    }

    /// Joins each prefix into the prefixes of its present ancestors, so that
    /// a supertype's prefix dominates its subtypes'.
    pub fn normalize_subtyping(&self, c: &ControlEffect) -> Result<ControlEffect, NormalizeError> {
        let mut out = c.clone();
        for (t, p) in &c.controls {
            let ControlTag::Exception(e) = t else { continue };
            for anc in self.poset.ancestors(*e) {
                let tag = ControlTag::Exception(anc);
                let Some(slot) = out.controls.iter_mut().find(|(u, _)| *u == tag) else {
                    continue;
                };
                match self.sys.join(&slot.1, p)? {
                    Some(j) => slot.1 = j,
                    None => {
                        return Err(NormalizeError::UndefinedJoin {
                            sub: self.poset.name(*e).to_string(),
                            sup: self.poset.name(anc).to_string(),
                            sub_prefix: self.sys.render(p),
                            sup_prefix: self.sys.render(&slot.1),
                        })
                    }
                }
            }
        }
        Ok(out)
    }

    /// Combines a try block's effect with its catch clauses. Each exception
    /// entry is handled by the first clause whose tag is at least as general;
    /// the handler runs after the entry's prefix. The result joins the
    /// uncaught remainder of the try effect with every handled path.
    pub fn handle(&self, try_eff: &ControlEffect, catches: &[(ExcId, ControlEffect)]) -> R<ControlEffect> {
        let mut rest = ControlEffect { normal: try_eff.normal.clone(), controls: Vec::new() };
        let mut paths = Vec::new();
        for (t, p) in &try_eff.controls {
            let clause = match t {
                ControlTag::Exception(_) => catches
                    .iter()
                    .find(|(c, _)| self.poset.le(*t, ControlTag::Exception(*c))),
                _ => None,
            };
            match clause {
                Some((_, handler)) => paths.push(self.seq(&self.lift(p.clone()), handler)?),
                None => rest.controls.push((*t, p.clone())),
            }
        }
        let mut acc = rest;
        for path in paths {
            let Some(path) = path else { return Ok(None) };
            match self.join(&acc, &path)? {
                Some(j) => acc = j,
                None => return Ok(None),
            }
        }
        Ok(Some(acc))
    }

    /// Folds the prefixes of the given tags into the normal effect.
    pub fn flatten(&self, c: &ControlEffect, tags: &[ControlTag]) -> R<ControlEffect> {
        let mut normal = c.normal.clone();
        let mut controls = Vec::new();
        for (t, p) in &c.controls {
            if !tags.contains(t) {
                controls.push((*t, p.clone()));
                continue;
            }
            normal = match normal {
                None => Some(p.clone()),
                Some(n) => match self.sys.join(&n, p)? {
                    Some(j) => Some(j),
                    None => return Ok(None),
                },
            };
        }
        Ok(Some(ControlEffect { normal, controls }))
    }

    /// Removes entries for the given tags.
    pub fn without(&self, c: &ControlEffect, tags: &[ControlTag]) -> ControlEffect {
        ControlEffect {
            normal: c.normal.clone(),
            controls: c.controls.iter().filter(|(t, _)| !tags.contains(t)).cloned().collect(),
        }
    }

    pub fn render(&self, c: &ControlEffect) -> String {
        Display { alg: self, c }.to_string()
    }

    /// Every control effect whose tags come from `tags`, with the base
    /// carrier's elements as normal effects and prefixes. The all-absent
    /// effect `(None, ∅)` is not a member.
    pub fn enumerate(&self, tags: &[ControlTag]) -> Option<Vec<ControlEffect>> {
        let base = self.sys.elements()?;
        let mut normals = vec![None];
        normals.extend(base.iter().cloned().map(Some));
        let mut entry_sets: Vec<Vec<(ControlTag, Effect)>> = vec![Vec::new()];
        for &t in tags {
            let mut next = Vec::new();
            for set in &entry_sets {
                next.push(set.clone());
                for p in &base {
                    let mut s = set.clone();
                    s.push((t, p.clone()));
                    next.push(s);
                }
            }
            entry_sets = next;
        }
        let mut out = Vec::new();
        for n in &normals {
            for set in &entry_sets {
                if n.is_none() && set.is_empty() {
                    continue;
                }
                out.push(ControlEffect::from_parts(n.clone(), set.clone()).expect("distinct tags"));
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error(
        "prefix of `{sub}` ({sub_prefix}) has no join with the prefix of its supertype `{sup}` ({sup_prefix})"
    )]
    UndefinedJoin { sub: String, sup: String, sub_prefix: String, sup_prefix: String },
    #[error(transparent)]
    Effect(#[from] EffectError),
}

struct Display<'a, 'b> {
    alg: &'a ControlAlgebra<'b>,
    c: &'a ControlEffect,
}

impl fmt::Display for Display<'_, '_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sys = self.alg.sys;
        match &self.c.normal {
            Some(n) => write!(f, "{}", sys.render(n))?,
            None => write!(f, "none")?,
        }
        if !self.c.controls.is_empty() {
            let parts: Vec<String> = self
                .c
                .controls
                .iter()
                .map(|(t, p)| format!("{}: {}", self.alg.poset.tag_name(*t), sys.render(p)))
                .collect();
            write!(f, " {{{}}}", parts.join(", "))?;
        }
        Ok(())
    }
}

impl Algebra for ControlAlgebra<'_> {
    type Elem = ControlEffect;

    fn unit(&self) -> ControlEffect {
        ControlAlgebra::unit(self)
    }

    fn seq(&self, a: &ControlEffect, b: &ControlEffect) -> R<ControlEffect> {
        ControlAlgebra::seq(self, a, b)
    }

    fn join(&self, a: &ControlEffect, b: &ControlEffect) -> R<ControlEffect> {
        ControlAlgebra::join(self, a, b)
    }

    fn le(&self, a: &ControlEffect, b: &ControlEffect) -> Result<bool, EffectError> {
        ControlAlgebra::le(self, a, b)
    }

    fn iter(&self, a: &ControlEffect) -> R<ControlEffect> {
        ControlAlgebra::iter(self, a)
    }

    fn residual(&self, a: &ControlEffect, b: &ControlEffect) -> R<ControlEffect> {
        ControlAlgebra::residual(self, a, b)
    }

    fn render(&self, a: &ControlEffect) -> String {
        ControlAlgebra::render(self, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::atomicity;
    use crate::quantale::laws::{check_exhaustive, LawSet};

    struct Fx {
        sys: EffectSystem,
        poset: TagPoset,
    }

    impl Fx {
        fn new() -> Self {
            let mut poset = TagPoset::new();
            poset.declare("E", None).unwrap();
            poset.declare("Sub", Some("E")).unwrap();
            Fx { sys: atomicity::system(), poset }
        }
        fn alg(&self) -> ControlAlgebra<'_> {
            ControlAlgebra::new(&self.sys, &self.poset)
        }
        fn e(&self, n: &str) -> Effect {
            self.sys.parse_effect(n).unwrap()
        }
        fn tag(&self, n: &str) -> ControlTag {
            ControlTag::Exception(self.poset.lookup(n).unwrap())
        }
        fn c(&self, normal: Option<&str>, entries: &[(&str, &str)]) -> ControlEffect {
            let controls = entries.iter().map(|(t, p)| (self.tag(t), self.e(p))).collect();
            ControlEffect::from_parts(normal.map(|n| self.e(n)), controls).unwrap()
        }
    }

    #[test]
    fn sequencing_cases() {
        let fx = Fx::new();
        let a = fx.alg();
        let thrown = fx.c(None, &[("E", "R")]);
        assert_eq!(a.seq(&thrown, &fx.c(Some("A"), &[])).unwrap(), Some(thrown.clone()));
        let got = a.seq(&fx.c(Some("R"), &[]), &fx.c(None, &[("E", "L")])).unwrap();
        assert_eq!(got, Some(fx.c(None, &[("E", "A")])));
        let got = a.seq(&fx.c(Some("R"), &[]), &fx.c(Some("L"), &[])).unwrap();
        assert_eq!(got, Some(fx.c(Some("A"), &[])));
    }

    #[test]
    fn joins() {
        let fx = Fx::new();
        let a = fx.alg();
        let got = a.join(&fx.c(Some("L"), &[("E", "B")]), &fx.c(Some("R"), &[("E", "L")])).unwrap();
        assert_eq!(got, Some(fx.c(Some("A"), &[("E", "L")])));
        let got = a.join(&fx.c(None, &[("E", "R")]), &fx.c(Some("B"), &[])).unwrap();
        assert_eq!(got, Some(fx.c(Some("B"), &[("E", "R")])));
    }

    #[test]
    fn residual_spot_values() {
        let fx = Fx::new();
        let a = fx.alg();
        let got = a.residual(&fx.c(Some("A"), &[]), &fx.c(Some("A"), &[])).unwrap();
        assert_eq!(got, Some(fx.c(Some("L"), &[])));
        let got = a.residual(&fx.c(Some("B"), &[("E", "A")]), &fx.c(Some("A"), &[("E", "A")])).unwrap();
        assert_eq!(got, Some(fx.c(Some("A"), &[("E", "A")])));
        let got = a.residual(&fx.c(Some("B"), &[("E", "T")]), &fx.c(Some("A"), &[("E", "A")])).unwrap();
        assert_eq!(got, None);
    }

    #[test]
    fn subtype_entries_are_bounded_by_supertype_targets() {
        let fx = Fx::new();
        let a = fx.alg();
        let got = a.residual(&fx.c(Some("B"), &[("Sub", "R")]), &fx.c(Some("A"), &[("E", "A")])).unwrap();
        assert!(got.is_some());
        let got = a.residual(&fx.c(Some("B"), &[("E", "R")]), &fx.c(Some("A"), &[("Sub", "A")])).unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn normalize_joins_into_present_supertypes() {
        let fx = Fx::new();
        let a = fx.alg();
        let got = a.normalize_subtyping(&fx.c(Some("B"), &[("Sub", "R"), ("E", "L")])).unwrap();
        assert_eq!(got, fx.c(Some("B"), &[("Sub", "R"), ("E", "A")]));
        let alone = fx.c(Some("B"), &[("Sub", "R")]);
        assert_eq!(a.normalize_subtyping(&alone).unwrap(), alone);
    }

    #[test]
    fn catching_restores_normal_completion() {
        let fx = Fx::new();
        let a = fx.alg();
        let thrown = a.jump(fx.tag("E"));
        let catches = [(fx.poset.lookup("E").unwrap(), a.unit())];
        assert_eq!(a.handle(&thrown, &catches).unwrap(), Some(a.unit()));
        let other = fx.c(Some("B"), &[("Sub", "R")]);
        let only_sub = [(fx.poset.lookup("Sub").unwrap(), a.unit())];
        assert_eq!(a.handle(&fx.c(Some("B"), &[("E", "R")]), &only_sub).unwrap(), Some(fx.c(Some("B"), &[("E", "R")])));
        assert_eq!(a.handle(&other, &catches).unwrap(), Some(fx.c(Some("R"), &[])));
    }

    #[test]
    fn exception_construction_satisfies_the_laws() {
        let sys = atomicity::system();
        let poset = TagPoset::discrete(2);
        let a = ControlAlgebra::new(&sys, &poset);
        let tags = [ControlTag::Exception(ExcId(0)), ControlTag::Exception(ExcId(1))];
        let elems = a.enumerate(&tags).unwrap();
        assert_eq!(elems.len(), 6 * 6 * 6 - 1);
        let r = check_exhaustive(&a, "exceptions(atomicity)", &elems, LawSet::AXIOMS).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn shifting_can_fail_after_a_committed_jump() {
        let fx = Fx::new();
        let a = fx.alg();
        let x = fx.c(None, &[("E", "B")]);
        let xy = a.seq(&x, &x).unwrap().unwrap();
        assert!(a.residual(&xy, &x).unwrap().is_some());
        let r = a.residual(&x, &x).unwrap().unwrap();
        assert!(a.residual(&x, &r).unwrap().is_none());
    }

    #[test]
    fn flattening_breaks() {
        let fx = Fx::new();
        let a = fx.alg();
        let l = ControlTag::Break(LoopId(0));
        let c = ControlEffect::from_parts(Some(fx.e("L")), vec![(l, fx.e("R"))]).unwrap();
        assert_eq!(a.flatten(&c, &[l]).unwrap(), Some(fx.c(Some("A"), &[])));
        assert_eq!(a.flatten(&c, &[ControlTag::Return]).unwrap(), Some(c));
    }
}
