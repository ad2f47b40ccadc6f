//! Concrete effect quantales.

pub mod atomicity;
pub mod lift;
pub mod must;
pub mod pmonad;
pub mod reentrancy;
pub mod trace;
