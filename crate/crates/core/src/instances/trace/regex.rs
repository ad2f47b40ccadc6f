//! Regular expressions over a declared alphabet of named symbols.
//!
//! Syntax: symbol names (longest match), `ε`, juxtaposition for
//! concatenation, `|`, postfix `*`, `+`, `?`, and parentheses. Whitespace is
//! ignored.

use rand::{Rng, RngCore};

use super::dfa::{Dfa, Nfa};
use crate::quantale::EffectError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    /// The empty language. Not writable in source; arises when rendering.
    Empty,
    Epsilon,
    Sym(usize),
    Cat(Box<Regex>, Box<Regex>),
    Alt(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    pub fn cat(a: Regex, b: Regex) -> Regex {
        match (a, b) {
            (Regex::Empty, _) | (_, Regex::Empty) => Regex::Empty,
            (Regex::Epsilon, r) | (r, Regex::Epsilon) => r,
            (a, b) => Regex::Cat(Box::new(a), Box::new(b)),
        }
    }

    pub fn alt(a: Regex, b: Regex) -> Regex {
        match (a, b) {
            (Regex::Empty, r) | (r, Regex::Empty) => r,
            (a, b) if a == b => a,
            (a, b) => Regex::Alt(Box::new(a), Box::new(b)),
        }
    }

    pub fn star(a: Regex) -> Regex {
        match a {
            Regex::Empty | Regex::Epsilon => Regex::Epsilon,
            s @ Regex::Star(_) => s,
            a => Regex::Star(Box::new(a)),
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            Regex::Empty | Regex::Epsilon | Regex::Sym(_) => 1,
            Regex::Cat(a, b) | Regex::Alt(a, b) => 1 + a.size() + b.size(),
            Regex::Star(a) => 1 + a.size(),
        }
    }

    fn build(&self, n: &mut Nfa) -> (u32, u32) {
        match self {
            Regex::Empty => (n.add_state(false), n.add_state(false)),
            Regex::Epsilon => {
                let s = n.add_state(false);
                let f = n.add_state(false);
                n.add_eps(s, f);
                (s, f)
            }
            Regex::Sym(a) => {
                let s = n.add_state(false);
                let f = n.add_state(false);
                n.add_edge(s, *a, f);
                (s, f)
            }
            Regex::Cat(a, b) => {
                let (s1, f1) = a.build(n);
                let (s2, f2) = b.build(n);
                n.add_eps(f1, s2);
                (s1, f2)
            }
            Regex::Alt(a, b) => {
                let s = n.add_state(false);
                let f = n.add_state(false);
                for r in [a, b] {
                    let (s1, f1) = r.build(n);
                    n.add_eps(s, s1);
                    n.add_eps(f1, f);
                }
                (s, f)
            }
            Regex::Star(a) => {
                let s = n.add_state(false);
                let f = n.add_state(false);
                let (s1, f1) = a.build(n);
                n.add_eps(s, s1);
                n.add_eps(s, f);
                n.add_eps(f1, s1);
                n.add_eps(f1, f);
                (s, f)
            }
        }
    }

    pub fn to_dfa(&self, k: usize, limit: usize) -> Result<Dfa, EffectError> {
        let mut n = Nfa::new(k);
        let (s, f) = self.build(&mut n);
        n.accept[f as usize] = true;
        n.start = s;
        n.determinize(limit)
    }

    /// Converts an automaton back to an expression by state elimination.
    pub fn from_dfa(d: &Dfa) -> Regex {
        let live = d.live_states();
        let states: Vec<usize> = (0..d.states()).filter(|&q| live[q]).collect();
        if states.is_empty() {
            return Regex::Empty;
        }
        // Index 0 is a fresh start, 1 a fresh final, then the live states.
        let m = states.len() + 2;
        let pos = |q: usize| states.iter().position(|&s| s == q).map(|i| i + 2);
        let mut r = vec![vec![Regex::Empty; m]; m];
        r[0][pos(0).expect("start is live")] = Regex::Epsilon;
        for &q in &states {
            let i = pos(q).expect("live");
            if d.is_accepting(q) {
                r[i][1] = Regex::Epsilon;
            }
            for a in 0..d.alphabet_size() {
                if let Some(j) = pos(d.next(q, a)) {
                    let old = std::mem::replace(&mut r[i][j], Regex::Empty);
                    r[i][j] = Regex::alt(old, Regex::Sym(a));
                }
            }
        }
        for x in 2..m {
            let loop_ = Regex::star(r[x][x].clone());
            for i in (0..m).filter(|&i| i != x) {
                if r[i][x] == Regex::Empty {
                    continue;
                }
                for j in (0..m).filter(|&j| j != x) {
                    if r[x][j] == Regex::Empty {
                        continue;
                    }
                    let through = Regex::cat(Regex::cat(r[i][x].clone(), loop_.clone()), r[x][j].clone());
                    let old = std::mem::replace(&mut r[i][j], Regex::Empty);
                    r[i][j] = Regex::alt(old, through);
                }
            }
            for i in 0..m {
                r[i][x] = Regex::Empty;
                r[x][i] = Regex::Empty;
            }
        }
        r[0][1].clone()
    }

    pub fn display(&self, alphabet: &[String]) -> String {
        let spaced = alphabet.iter().any(|s| s.chars().count() > 1);
        let mut out = String::new();
        self.write(alphabet, spaced, 0, &mut out);
        out
    }

    fn write(&self, alphabet: &[String], spaced: bool, prec: u8, out: &mut String) {
        let paren = |p: u8, out: &mut String, f: &dyn Fn(&mut String)| {
            if prec > p {
                out.push('(');
                f(out);
                out.push(')');
            } else {
                f(out);
            }
        };
        match self {
            Regex::Empty => out.push('∅'),
            Regex::Epsilon => out.push('ε'),
            Regex::Sym(a) => out.push_str(&alphabet[*a]),
            Regex::Alt(a, b) => paren(0, out, &|out| {
                a.write(alphabet, spaced, 0, out);
                out.push('|');
                b.write(alphabet, spaced, 0, out);
            }),
            Regex::Cat(a, b) => paren(1, out, &|out| {
                a.write(alphabet, spaced, 1, out);
                if spaced {
                    out.push(' ');
                }
                b.write(alphabet, spaced, 1, out);
            }),
            Regex::Star(a) => {
                a.write(alphabet, spaced, 2, out);
                out.push('*');
            }
        }
    }

    /// A random expression with exactly `size` nodes over `k` symbols, built
    /// from symbols, `ε`, concatenation, alternation and star.
    pub fn random(rng: &mut dyn RngCore, k: usize, size: usize) -> Regex {
        match size {
            0 | 1 => {
                let pick = rng.random_range(0..=k);
                if pick == k {
                    Regex::Epsilon
                } else {
                    Regex::Sym(pick)
                }
            }
            2 => Regex::Star(Box::new(Regex::random(rng, k, 1))),
            _ => {
                if rng.random_range(0..3) == 0 {
                    return Regex::Star(Box::new(Regex::random(rng, k, size - 1)));
                }
                let left = rng.random_range(1..size - 1);
                let a = Box::new(Regex::random(rng, k, left));
                let b = Box::new(Regex::random(rng, k, size - 1 - left));
                if rng.random_bool(0.5) {
                    Regex::Cat(a, b)
                } else {
                    Regex::Alt(a, b)
                }
            }
        }
    }
}

pub fn parse(text: &str, alphabet: &[String]) -> Result<Regex, String> {
    let mut p = Parser { text, pos: 0, alphabet };
    let r = p.alt()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(format!("unexpected `{}` at offset {}", &text[p.pos..], p.pos));
    }
    Ok(r)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    alphabet: &'a [String],
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn alt(&mut self) -> Result<Regex, String> {
        let mut r = self.cat()?;
        loop {
            self.skip_ws();
            if self.peek() != Some('|') {
                return Ok(r);
            }
            self.pos += 1;
            let rhs = self.cat()?;
            r = Regex::Alt(Box::new(r), Box::new(rhs));
        }
    }

    fn cat(&mut self) -> Result<Regex, String> {
        let mut parts = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some('|') | Some(')') => break,
                _ => parts.push(self.postfix()?),
            }
        }
        let mut it = parts.into_iter();
        let Some(first) = it.next() else {
            return Err(format!("empty expression at offset {}", self.pos));
        };
        Ok(it.fold(first, |a, b| Regex::Cat(Box::new(a), Box::new(b))))
    }

    fn postfix(&mut self) -> Result<Regex, String> {
        let mut r = self.atom()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => r = Regex::Star(Box::new(r)),
                Some('+') => r = Regex::Cat(Box::new(r.clone()), Box::new(Regex::Star(Box::new(r)))),
                Some('?') => r = Regex::Alt(Box::new(r), Box::new(Regex::Epsilon)),
                _ => return Ok(r),
            }
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> Result<Regex, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let r = self.alt()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(format!("expected `)` at offset {}", self.pos));
                }
                self.pos += 1;
                Ok(r)
            }
            Some('ε') => {
                self.pos += 'ε'.len_utf8();
                Ok(Regex::Epsilon)
            }
            _ => {
                let rest = &self.text[self.pos..];
                let best = self
                    .alphabet
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| rest.starts_with(s.as_str()))
                    .max_by_key(|(_, s)| s.len());
                match best {
                    Some((i, s)) => {
                        self.pos += s.len();
                        Ok(Regex::Sym(i))
                    }
                    None => Err(format!("unknown symbol at `{rest}`")),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn parse_precedence() {
        let r = parse("ab*|b", &ab()).unwrap();
        let want = Regex::Alt(
            Box::new(Regex::Cat(Box::new(Regex::Sym(0)), Box::new(Regex::Star(Box::new(Regex::Sym(1)))))),
            Box::new(Regex::Sym(1)),
        );
        assert_eq!(r, want);
    }

    #[test]
    fn longest_symbol_wins() {
        let alpha = vec!["lock".to_string(), "lockall".to_string()];
        assert_eq!(parse("lockall", &alpha).unwrap(), Regex::Sym(1));
        assert!(parse("unlock", &alpha).is_err());
    }

    #[test]
    fn display_round_trips_through_automata() {
        let alpha = ab();
        for text in ["a(b|a)*", "ε|ab", "(a|b)*b", "a+b?"] {
            let d = parse(text, &alpha).unwrap().to_dfa(2, 1000).unwrap();
            let shown = Regex::from_dfa(&d).display(&alpha);
            let back = parse(&shown, &alpha).unwrap().to_dfa(2, 1000).unwrap();
            assert_eq!(d, back, "{text} rendered as {shown}");
        }
    }

    #[test]
    fn errors() {
        assert!(parse("", &ab()).is_err());
        assert!(parse("(a", &ab()).is_err());
        assert!(parse("a)", &ab()).is_err());
        assert!(parse("c", &ab()).is_err());
    }
}
