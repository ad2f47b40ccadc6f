//! Table-driven finite effect quantales.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Deserialize;

use super::{Carrier, EffectError, EffectSystem, Payload};

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("carrier has no elements")]
    Empty,
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("table `{table}` has wrong shape: {reason}")]
    Shape { table: &'static str, reason: String },
    #[error("semilattice has no bottom element to serve as unit")]
    NoBottom,
    #[error("cannot read `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed quantale description: {0}")]
    Json(#[from] serde_json::Error),
}

/// A finite carrier given by explicit operation tables. Undefined cells are
/// `None`. Missing iteration/residual tables are derived from `seq` and `join`.
#[derive(Debug, Clone)]
pub struct FiniteQuantale {
    names: Vec<String>,
    index: HashMap<String, u32>,
    unit: u32,
    seq: Vec<Option<u32>>,
    join: Vec<Option<u32>>,
    iter: Vec<Option<u32>>,
    residual: Vec<Option<u32>>,
    commutative: bool,
}

pub type Table2 = Vec<Vec<Option<usize>>>;

impl FiniteQuantale {
    /// Builds a quantale from index tables. `iter` and `residual` are derived
    /// when not supplied.
    pub fn from_tables(
        names: Vec<String>,
        unit: usize,
        seq: Table2,
        join: Table2,
        iter: Option<Vec<Option<usize>>>,
        residual: Option<Table2>,
        commutative: bool,
    ) -> Result<Self, TableError> {
        let n = names.len();
        if n == 0 {
            return Err(TableError::Empty);
        }
        let mut index = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i as u32).is_some() {
                return Err(TableError::DuplicateElement(name.clone()));
            }
        }
        if unit >= n {
            return Err(TableError::Shape { table: "unit", reason: format!("index {unit} out of range") });
        }
        let flat = |t: Table2, table: &'static str| -> Result<Vec<Option<u32>>, TableError> {
            if t.len() != n || t.iter().any(|row| row.len() != n) {
                return Err(TableError::Shape { table, reason: format!("expected {n}x{n}") });
            }
            let mut out = Vec::with_capacity(n * n);
            for cell in t.into_iter().flatten() {
                if let Some(c) = cell {
                    if c >= n {
                        return Err(TableError::Shape { table, reason: format!("index {c} out of range") });
                    }
                }
                out.push(cell.map(|c| c as u32));
            }
            Ok(out)
        };
        let mut q = FiniteQuantale {
            names,
            index,
            unit: unit as u32,
            seq: flat(seq, "seq")?,
            join: flat(join, "join")?,
            iter: Vec::new(),
            residual: Vec::new(),
            commutative,
        };
        q.iter = match iter {
            Some(t) => {
                if t.len() != n || t.iter().flatten().any(|&c| c >= n) {
                    return Err(TableError::Shape { table: "iter", reason: format!("expected {n} cells") });
                }
                t.into_iter().map(|c| c.map(|c| c as u32)).collect()
            }
            None => (0..n).map(|x| derive_iter(&q, x).map(|c| c as u32)).collect(),
        };
        q.residual = match residual {
            Some(t) => flat(t, "residual")?,
            None => (0..n * n)
                .map(|i| derive_residual(&q, i / n, i % n).map(|c| c as u32))
                .collect(),
        };
        Ok(q)
    }

    /// Loads the JSON description format. Returns the quantale and its atom
    /// table (label → element index).
    pub fn from_json(text: &str) -> Result<(Self, BTreeMap<String, usize>), TableError> {
        let spec: JsonQuantale = serde_json::from_str(text)?;
        spec.build()
    }

    pub fn load(path: &Path) -> Result<(Self, BTreeMap<String, usize>), TableError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| TableError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).map(|&i| i as usize)
    }

    pub fn unit_index(&self) -> usize {
        self.unit as usize
    }

    pub fn seq_ix(&self, a: usize, b: usize) -> Option<usize> {
        self.seq[a * self.len() + b].map(|c| c as usize)
    }

    pub fn join_ix(&self, a: usize, b: usize) -> Option<usize> {
        self.join[a * self.len() + b].map(|c| c as usize)
    }

    pub fn le_ix(&self, a: usize, b: usize) -> bool {
        self.join_ix(a, b) == Some(b)
    }

    pub fn iter_ix(&self, a: usize) -> Option<usize> {
        self.iter[a].map(|c| c as usize)
    }

    pub fn residual_ix(&self, a: usize, b: usize) -> Option<usize> {
        self.residual[a * self.len() + b].map(|c| c as usize)
    }

    /// Overwrites one sequencing cell. Used to build deliberately broken
    /// tables in tests and fixtures.
    pub fn set_seq(&mut self, a: usize, b: usize, r: Option<usize>) {
        let n = self.len();
        self.seq[a * n + b] = r.map(|c| c as u32);
    }

    pub fn is_commutative(&self) -> bool {
        self.commutative
    }

    /// Makes `alias` parse as element `i`. Rendering still uses the name.
    pub fn add_alias(&mut self, alias: &str, i: usize) {
        self.index.insert(alias.to_string(), i as u32);
    }

    fn ix(&self, p: &Payload) -> Result<usize, EffectError> {
        match p {
            Payload::Elem(i) if (*i as usize) < self.len() => Ok(*i as usize),
            _ => Err(EffectError::ForeignPayload),
        }
    }
}

/// Least element `y` with `unit ⊔ x ⊑ y` and `y ▷ y ⊑ y`, searched over the
/// carrier. If the closed elements above `x` have several minimal members and
/// no least one, the lowest-indexed minimal element is returned.
pub fn derive_iter(q: &FiniteQuantale, x: usize) -> Option<usize> {
    let base = q.join_ix(q.unit_index(), x)?;
    let closed: Vec<usize> = (0..q.len())
        .filter(|&y| q.le_ix(base, y))
        .filter(|&y| q.seq_ix(y, y).is_some_and(|yy| q.le_ix(yy, y)))
        .collect();
    if let Some(&least) = closed.iter().find(|&&c| closed.iter().all(|&d| q.le_ix(c, d))) {
        return Some(least);
    }
    closed
        .iter()
        .copied()
        .find(|&c| !closed.iter().any(|&d| d != c && q.le_ix(d, c)))
}

/// Weak residual `sofar \ target` from the candidate set
/// `S = { r | sofar ▷ r ⊑ target }`: the join of `S` when defined, otherwise
/// the lowest-indexed maximal element of `S`.
pub fn derive_residual(q: &FiniteQuantale, sofar: usize, target: usize) -> Option<usize> {
    let s: Vec<usize> = (0..q.len())
        .filter(|&r| q.seq_ix(sofar, r).is_some_and(|sr| q.le_ix(sr, target)))
        .collect();
    let (&first, rest) = s.split_first()?;
    let joined = rest.iter().try_fold(first, |acc, &r| q.join_ix(acc, r));
    if joined.is_some() {
        return joined;
    }
    s.iter()
        .copied()
        .find(|&c| !s.iter().any(|&d| d != c && q.le_ix(c, d)))
}

impl Carrier for FiniteQuantale {
    fn unit(&self) -> Payload {
        Payload::Elem(self.unit)
    }

    fn seq(&self, a: &Payload, b: &Payload) -> Result<Option<Payload>, EffectError> {
        let r = self.seq_ix(self.ix(a)?, self.ix(b)?);
        Ok(r.map(|c| Payload::Elem(c as u32)))
    }

    fn join(&self, a: &Payload, b: &Payload) -> Result<Option<Payload>, EffectError> {
        let r = self.join_ix(self.ix(a)?, self.ix(b)?);
        Ok(r.map(|c| Payload::Elem(c as u32)))
    }

    fn le(&self, a: &Payload, b: &Payload) -> Result<bool, EffectError> {
        Ok(self.le_ix(self.ix(a)?, self.ix(b)?))
    }

    fn iter(&self, a: &Payload) -> Result<Option<Payload>, EffectError> {
        Ok(self.iter_ix(self.ix(a)?).map(|c| Payload::Elem(c as u32)))
    }

    fn residual(&self, sofar: &Payload, target: &Payload) -> Result<Option<Payload>, EffectError> {
        let r = self.residual_ix(self.ix(sofar)?, self.ix(target)?);
        Ok(r.map(|c| Payload::Elem(c as u32)))
    }

    fn is_commutative(&self) -> bool {
        self.commutative
    }

    fn render(&self, a: &Payload) -> String {
        match self.ix(a) {
            Ok(i) => self.names[i].clone(),
            Err(_) => "<foreign>".to_string(),
        }
    }

    fn parse_literal(&self, text: &str) -> Result<Payload, EffectError> {
        let key = normalize_literal(text);
        self.index_of(&key)
            .map(|i| Payload::Elem(i as u32))
            .ok_or_else(|| EffectError::UnknownEffect(text.trim().to_string()))
    }

    fn elements(&self) -> Option<Vec<Payload>> {
        Some((0..self.len() as u32).map(Payload::Elem).collect())
    }
}

/// Canonical spelling of an element literal: whitespace removed, and the
/// members of a set literal `{b,a}` sorted.
pub fn normalize_literal(text: &str) -> String {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(inner) = compact.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
        let mut parts: Vec<&str> = inner.split(',').filter(|s| !s.is_empty()).collect();
        parts.sort_unstable();
        parts.dedup();
        return format!("{{{}}}", parts.join(","));
    }
    compact
}

/// Wraps a finite quantale into a system whose atoms are given by element
/// index.
pub fn finite_system(
    name: impl Into<String>,
    q: FiniteQuantale,
    atoms: BTreeMap<String, usize>,
) -> EffectSystem {
    let atoms = atoms
        .into_iter()
        .map(|(label, i)| (label, Payload::Elem(i as u32)))
        .collect();
    EffectSystem::new(name, q, atoms)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonQuantale {
    elements: Vec<String>,
    unit: String,
    seq: BTreeMap<String, BTreeMap<String, Option<String>>>,
    join: BTreeMap<String, BTreeMap<String, Option<String>>>,
    #[serde(default)]
    iter: Option<BTreeMap<String, Option<String>>>,
    #[serde(default)]
    residual: Option<BTreeMap<String, BTreeMap<String, Option<String>>>>,
    #[serde(default)]
    commutative: bool,
    #[serde(default)]
    atoms: BTreeMap<String, String>,
}

impl JsonQuantale {
    fn build(self) -> Result<(FiniteQuantale, BTreeMap<String, usize>), TableError> {
        let n = self.elements.len();
        let mut index = HashMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(TableError::DuplicateElement(e.clone()));
            }
        }
        let look = |name: &str| -> Result<usize, TableError> {
            index.get(name).copied().ok_or_else(|| TableError::UnknownElement(name.to_string()))
        };
        let table = |m: &BTreeMap<String, BTreeMap<String, Option<String>>>| -> Result<Table2, TableError> {
            let mut t = vec![vec![None; n]; n];
            for (a, row) in m {
                let ai = look(a)?;
                for (b, cell) in row {
                    let bi = look(b)?;
                    t[ai][bi] = cell.as_deref().map(look).transpose()?;
                }
            }
            Ok(t)
        };
        let seq = table(&self.seq)?;
        let join = table(&self.join)?;
        let residual = self.residual.as_ref().map(table).transpose()?;
        let iter = match &self.iter {
            Some(m) => {
                let mut t = vec![None; n];
                for (a, cell) in m {
                    t[look(a)?] = cell.as_deref().map(look).transpose()?;
                }
                Some(t)
            }
            None => None,
        };
        let unit = look(&self.unit)?;
        let atoms = self
            .atoms
            .iter()
            .map(|(label, e)| Ok((label.clone(), look(e)?)))
            .collect::<Result<BTreeMap<_, _>, TableError>>()?;
        let q = FiniteQuantale::from_tables(self.elements, unit, seq, join, iter, residual, self.commutative)?;
        Ok((q, atoms))
    }
}
