//! Sequential effect checking over effect quantales, with residual-based
//! localization of effect errors.
//!
//! The crate is layered bottom-up:
//!
//! * [`quantale`]: the abstract algebra, finite table-driven quantales and
//!   a generic law checker.
//! * [`instances`]: atomicity, reentrancy, finite traces, must-effects,
//!   parameterized monads and commutative lifts.
//! * [`control`]: the exception/break/return construction over any quantale.
//! * [`syntax`]: lexer, parser, pretty-printer and resolver for `.eff` files.
//! * [`checker`]: the whole-construct checker and the residual-driven early
//!   checker.
//! * [`oracle`]: program enumeration and independent recomputation used to
//!   validate the checkers against each other.
//! * [`diagnostic`]: diagnostics and their placed, serializable form.
//! * [`registry`] and [`cli`]: system lookup by key and the command-line
//!   front end.

pub mod checker;
pub mod cli;
pub mod control;
pub mod diagnostic;
pub mod instances;
pub mod oracle;
pub mod quantale;
pub mod registry;
pub mod syntax;

pub use quantale::{Effect, EffectError, EffectSystem};
