//! The effect-quantale abstraction.
//!
//! An effect system is a carrier with a partial join, a partial sequencing
//! operator, a unit, a partial iteration operator and a (weak) right residual.
//! Every partial operation answers `Ok(None)` when the result is undefined;
//! `Err` is reserved for usage errors such as mixing effects from two
//! different systems.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use rand::RngCore;

use crate::instances::trace::Dfa;

pub mod finite;
pub mod laws;

pub use finite::{derive_iter, derive_residual, FiniteQuantale, TableError};
pub use laws::{check_laws, Algebra, Counterexample, LawReport, LawResult};

/// Identity of one constructed [`EffectSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemId(u32);

static NEXT_SYSTEM: AtomicU32 = AtomicU32::new(1);

impl SystemId {
    fn fresh() -> Self {
        SystemId(NEXT_SYSTEM.fetch_add(1, Ordering::Relaxed))
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Carrier-specific representation of an effect.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    /// Index into a finite, table-driven carrier.
    Elem(u32),
    /// A non-empty regular language as a canonical minimal automaton.
    Lang(Arc<Dfa>),
}

/// An element of some effect system's carrier. Immutable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Effect {
    system: SystemId,
    payload: Payload,
}

impl Effect {
    pub fn system(&self) -> SystemId {
        self.system
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EffectError {
    #[error("effect from system {found} used with system {expected}")]
    SystemMismatch { expected: SystemId, found: SystemId },
    #[error("payload is not an element of this carrier")]
    ForeignPayload,
    #[error("unknown effect `{0}`")]
    UnknownEffect(String),
    #[error("malformed effect literal `{text}`: {reason}")]
    BadLiteral { text: String, reason: String },
    #[error("automaton construction exceeded the limit of {limit} states")]
    StateLimit { limit: usize },
}

/// The operations a concrete carrier provides. Implementations work on raw
/// payloads; [`EffectSystem`] takes care of system identity.
pub trait Carrier: Send + Sync + fmt::Debug {
    fn unit(&self) -> Payload;
    fn seq(&self, a: &Payload, b: &Payload) -> Result<Option<Payload>, EffectError>;
    fn join(&self, a: &Payload, b: &Payload) -> Result<Option<Payload>, EffectError>;
    fn iter(&self, a: &Payload) -> Result<Option<Payload>, EffectError>;
    fn residual(&self, sofar: &Payload, target: &Payload) -> Result<Option<Payload>, EffectError>;

    /// `a ⊑ b` iff `a ⊔ b` is defined and equals `b`.
    fn le(&self, a: &Payload, b: &Payload) -> Result<bool, EffectError> {
        Ok(self.join(a, b)?.as_ref() == Some(b))
    }

    fn is_commutative(&self) -> bool {
        false
    }

    fn render(&self, a: &Payload) -> String;
    fn parse_literal(&self, text: &str) -> Result<Payload, EffectError>;

    /// Every element of the carrier, when it is finite.
    fn elements(&self) -> Option<Vec<Payload>> {
        None
    }

    /// A random element, for carriers whose laws are checked by sampling.
    fn sample(&self, _rng: &mut dyn RngCore) -> Option<Payload> {
        None
    }
}

/// A named effect quantale together with its table of source-level atoms.
#[derive(Debug)]
pub struct EffectSystem {
    id: SystemId,
    name: String,
    carrier: Box<dyn Carrier>,
    atoms: BTreeMap<String, Payload>,
}

impl EffectSystem {
    pub fn new(
        name: impl Into<String>,
        carrier: impl Carrier + 'static,
        atoms: BTreeMap<String, Payload>,
    ) -> Self {
        EffectSystem {
            id: SystemId::fresh(),
            name: name.into(),
            carrier: Box::new(carrier),
            atoms,
        }
    }

    pub fn id(&self) -> SystemId {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn carrier(&self) -> &dyn Carrier {
        self.carrier.as_ref()
    }

    fn wrap(&self, payload: Payload) -> Effect {
        Effect { system: self.id, payload }
    }

    fn own<'a>(&self, e: &'a Effect) -> Result<&'a Payload, EffectError> {
        if e.system == self.id {
            Ok(&e.payload)
        } else {
            Err(EffectError::SystemMismatch { expected: self.id, found: e.system })
        }
    }

    /// Adopts a raw payload produced by this system's carrier.
    pub fn from_payload(&self, payload: Payload) -> Effect {
        self.wrap(payload)
    }

    pub fn unit(&self) -> Effect {
        self.wrap(self.carrier.unit())
    }

    pub fn seq(&self, a: &Effect, b: &Effect) -> Result<Option<Effect>, EffectError> {
        let r = self.carrier.seq(self.own(a)?, self.own(b)?)?;
        Ok(r.map(|p| self.wrap(p)))
    }

    pub fn join(&self, a: &Effect, b: &Effect) -> Result<Option<Effect>, EffectError> {
        let r = self.carrier.join(self.own(a)?, self.own(b)?)?;
        Ok(r.map(|p| self.wrap(p)))
    }

    pub fn le(&self, a: &Effect, b: &Effect) -> Result<bool, EffectError> {
        self.carrier.le(self.own(a)?, self.own(b)?)
    }

    pub fn iter(&self, a: &Effect) -> Result<Option<Effect>, EffectError> {
        let r = self.carrier.iter(self.own(a)?)?;
        Ok(r.map(|p| self.wrap(p)))
    }

    /// The weak right residual `sofar \ target`: an effect that may still
    /// follow `sofar` while staying under `target`.
    pub fn residual(&self, sofar: &Effect, target: &Effect) -> Result<Option<Effect>, EffectError> {
        let r = self.carrier.residual(self.own(sofar)?, self.own(target)?)?;
        Ok(r.map(|p| self.wrap(p)))
    }

    pub fn is_commutative(&self) -> bool {
        self.carrier.is_commutative()
    }

    pub fn atom(&self, label: &str) -> Option<Effect> {
        self.atoms.get(label).map(|p| self.wrap(p.clone()))
    }

    pub fn atom_labels(&self) -> impl Iterator<Item = &str> {
        self.atoms.keys().map(String::as_str)
    }

    pub fn parse_effect(&self, text: &str) -> Result<Effect, EffectError> {
        self.carrier.parse_literal(text).map(|p| self.wrap(p))
    }

    pub fn render(&self, e: &Effect) -> String {
        match self.own(e) {
            Ok(p) => self.carrier.render(p),
            Err(_) => format!("<foreign effect from {}>", e.system),
        }
    }

    pub fn elements(&self) -> Option<Vec<Effect>> {
        self.carrier
            .elements()
            .map(|ps| ps.into_iter().map(|p| self.wrap(p)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.carrier.elements().is_some()
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Option<Effect> {
        self.carrier.sample(rng).map(|p| self.wrap(p))
    }
}

impl Algebra for EffectSystem {
    type Elem = Effect;

    fn unit(&self) -> Effect {
        EffectSystem::unit(self)
    }

    fn seq(&self, a: &Effect, b: &Effect) -> Result<Option<Effect>, EffectError> {
        EffectSystem::seq(self, a, b)
    }

    fn join(&self, a: &Effect, b: &Effect) -> Result<Option<Effect>, EffectError> {
        EffectSystem::join(self, a, b)
    }

    fn le(&self, a: &Effect, b: &Effect) -> Result<bool, EffectError> {
        EffectSystem::le(self, a, b)
    }

    fn iter(&self, a: &Effect) -> Result<Option<Effect>, EffectError> {
        EffectSystem::iter(self, a)
    }

    fn residual(&self, a: &Effect, b: &Effect) -> Result<Option<Effect>, EffectError> {
        EffectSystem::residual(self, a, b)
    }

    fn render(&self, a: &Effect) -> String {
        EffectSystem::render(self, a)
    }
}
