//! Finite-trace effects: non-empty regular languages over a declared
//! alphabet. Sequencing is concatenation, join is union, iteration is Kleene
//! star, and the residual is the left quotient `{ w | ∀x ∈ X. x·w ∈ Y }`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::quantale::{Carrier, EffectError, EffectSystem, Payload};

pub mod dfa;
pub mod regex;

pub use dfa::{Dfa, DEFAULT_STATE_LIMIT};
pub use regex::Regex;

/// Largest expression size drawn when sampling elements.
pub const SAMPLE_SIZE: usize = 6;

#[derive(Debug, Clone)]
pub struct TraceQuantale {
    alphabet: Vec<String>,
    limit: usize,
}

impl TraceQuantale {
    pub fn new(alphabet: Vec<String>) -> Result<Self, EffectError> {
        Self::with_limit(alphabet, DEFAULT_STATE_LIMIT)
    }

    pub fn with_limit(alphabet: Vec<String>, limit: usize) -> Result<Self, EffectError> {
        let bad = |reason: String| EffectError::BadLiteral { text: alphabet.join(","), reason };
        if alphabet.is_empty() {
            return Err(bad("alphabet is empty".into()));
        }
        for (i, s) in alphabet.iter().enumerate() {
            if s.is_empty() || !s.chars().all(|c| c.is_alphanumeric() || c == '_') || s == "ε" {
                return Err(bad(format!("bad symbol `{s}`")));
            }
            if alphabet[..i].contains(s) {
                return Err(bad(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(TraceQuantale { alphabet, limit })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    fn k(&self) -> usize {
        self.alphabet.len()
    }

    fn lang<'a>(&self, p: &'a Payload) -> Result<&'a Dfa, EffectError> {
        match p {
            Payload::Lang(d) if d.alphabet_size() == self.k() => Ok(d),
            _ => Err(EffectError::ForeignPayload),
        }
    }

    fn wrap(d: Dfa) -> Payload {
        Payload::Lang(Arc::new(d))
    }

    /// Compiles an expression to a carrier element; the empty language is
    /// rejected.
    pub fn compile(&self, r: &Regex) -> Result<Payload, EffectError> {
        let d = r.to_dfa(self.k(), self.limit)?;
        if d.is_empty() {
            return Err(EffectError::BadLiteral {
                text: r.display(&self.alphabet),
                reason: "denotes the empty language".into(),
            });
        }
        Ok(Self::wrap(d))
    }

    pub fn to_regex(&self, p: &Payload) -> Result<Regex, EffectError> {
        Ok(Regex::from_dfa(self.lang(p)?))
    }
}

impl Carrier for TraceQuantale {
    fn unit(&self) -> Payload {
        Self::wrap(Dfa::epsilon(self.k()))
    }

    fn seq(&self, a: &Payload, b: &Payload) -> Result<Option<Payload>, EffectError> {
        let d = self.lang(a)?.concat(self.lang(b)?, self.limit)?;
        Ok(Some(Self::wrap(d)))
    }

    fn join(&self, a: &Payload, b: &Payload) -> Result<Option<Payload>, EffectError> {
        let d = self.lang(a)?.union(self.lang(b)?, self.limit)?;
        Ok(Some(Self::wrap(d)))
    }

    fn le(&self, a: &Payload, b: &Payload) -> Result<bool, EffectError> {
        Ok(self.lang(a)?.is_subset(self.lang(b)?))
    }

    fn iter(&self, a: &Payload) -> Result<Option<Payload>, EffectError> {
        Ok(Some(Self::wrap(self.lang(a)?.star(self.limit)?)))
    }

    fn residual(&self, sofar: &Payload, target: &Payload) -> Result<Option<Payload>, EffectError> {
        let r = self.lang(sofar)?.residual(self.lang(target)?, self.limit)?;
        Ok(r.map(Self::wrap))
    }

    fn render(&self, a: &Payload) -> String {
        match self.lang(a) {
            Ok(d) => format!("re\"{}\"", Regex::from_dfa(d).display(&self.alphabet)),
            Err(_) => "<foreign>".to_string(),
        }
    }

    fn parse_literal(&self, text: &str) -> Result<Payload, EffectError> {
        let t = text.trim();
        let body = t
            .strip_prefix("re\"")
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(t);
        let r = regex::parse(body, &self.alphabet)
            .map_err(|reason| EffectError::BadLiteral { text: t.to_string(), reason })?;
        self.compile(&r)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Option<Payload> {
        let size = rng.random_range(1..=SAMPLE_SIZE);
        let r = Regex::random(rng, self.k(), size);
        self.compile(&r).ok()
    }
}

/// The trace system over `alphabet`; each symbol is also an atom denoting
/// the one-letter language.
pub fn system(alphabet: &[String]) -> Result<EffectSystem, EffectError> {
    let q = TraceQuantale::new(alphabet.to_vec())?;
    let k = alphabet.len();
    let atoms: BTreeMap<String, Payload> = alphabet
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), TraceQuantale::wrap(Dfa::word(k, &[i]))))
        .collect();
    Ok(EffectSystem::new(format!("trace:{}", alphabet.join(",")), q, atoms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> EffectSystem {
        system(&["a".into(), "b".into(), "c".into()]).unwrap()
    }

    #[test]
    fn concatenation_of_singletons() {
        let s = abc();
        let e = |t: &str| s.parse_effect(t).unwrap();
        assert_eq!(s.seq(&e("a"), &e("b")).unwrap(), Some(e("ab")));
        assert_eq!(s.seq(&s.unit(), &e("a|bc")).unwrap(), Some(e("a|bc")));
    }

    #[test]
    fn residual_spot_values() {
        let s = abc();
        let e = |t: &str| s.parse_effect(t).unwrap();
        assert_eq!(s.residual(&e("a"), &e("ab|ac")).unwrap(), Some(e("b|c")));
        assert_eq!(s.residual(&e("a"), &e("b")).unwrap(), None);
        assert_eq!(s.residual(&e("a*"), &e("a*")).unwrap(), Some(e("a*")));
    }

    #[test]
    fn literal_forms() {
        let s = abc();
        assert_eq!(s.parse_effect("re\"a(b|c)*\"").unwrap(), s.parse_effect("a(b|c)*").unwrap());
        assert_eq!(s.parse_effect("ε").unwrap(), s.unit());
        assert!(s.parse_effect("re\"d\"").is_err());
        assert_eq!(s.atom("b").unwrap(), s.parse_effect("b").unwrap());
    }

    #[test]
    fn rendering_parses_back() {
        let s = abc();
        for t in ["a(b|c)*", "ε|a", "(ab)*c", "a*b*"] {
            let x = s.parse_effect(t).unwrap();
            assert_eq!(s.parse_effect(&s.render(&x)).unwrap(), x, "{t}");
        }
    }

    #[test]
    fn order_is_inclusion() {
        let s = abc();
        let e = |t: &str| s.parse_effect(t).unwrap();
        assert!(s.le(&e("ab"), &e("a(b|c)")).unwrap());
        assert!(!s.le(&e("a(b|c)"), &e("ab")).unwrap());
    }
}
