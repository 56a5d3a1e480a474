//! Differential-algebraic engine for j-function functional transcendence.
//!
//! The crate is layered roughly bottom-up:
//! exact arithmetic ([`rational`], [`field`], [`mpoly`], [`gcd`], [`ratfunc`]),
//! then Groebner-basis commutative algebra and Laurent series, then the
//! geometric and differential layers built on both.

pub mod asverify;
pub mod convert;
pub mod coordfield;
pub mod derivation;
pub mod error;
pub mod field;
pub mod gcd;
pub mod groebner;
pub mod modular;
pub mod mpoly;
pub mod linalg;
pub mod rational;
pub mod ratfunc;
pub mod reductions;
pub mod report;
pub mod resultant;
pub mod series;
pub mod textio;
pub mod variety;
pub mod vars;
