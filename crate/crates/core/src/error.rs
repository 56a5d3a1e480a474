//! Crate-wide error type.
//!
//! Every fallible operation in the crate returns [`Error`]. Variants are
//! deliberately coarse: callers dispatch on the *kind* of failure (resource
//! limit, well-formed negative, malformed input), not on payload details.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands were built over different variable registries.
    #[error("variable registry mismatch: {0}")]
    RegistryMismatch(String),

    /// A rational function was constructed with a zero denominator.
    #[error("zero denominator")]
    ZeroDenominator,

    /// Laurent series operands live on incompatible exponent grids.
    #[error("incompatible exponent grids (denominators {0} and {1})")]
    IncompatibleGrid(u8, u8),

    /// Division by a series whose leading coefficient cannot be inverted.
    #[error("series division by zero")]
    SeriesDivisionByZero,

    /// A computation exceeded its step budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// The ideal under consideration is the unit ideal over its base field.
    #[error("unit ideal: {0}")]
    UnitIdeal(String),

    /// An operation that requires `assume_prime = true` was invoked without it.
    #[error("operation requires assume_prime on variety `{0}`")]
    NotPrimeAssumed(String),

    /// A coordinate hit the singular locus of the order-three equation
    /// (one of j_i, j_i - 1728, jp_i vanishes on the variety).
    #[error("singular locus: {0}")]
    SingularLocus(String),

    /// The affine constraint system has no solution.
    #[error("constraint system infeasible")]
    Infeasible,

    /// Every solution of the homogeneous system kills some coordinate.
    #[error("every derivation on the solution space annihilates coordinate {0}")]
    ConstantForced(String),

    /// Evaluation of a rational expression at a pole of its denominator.
    #[error("pole: {0}")]
    Pole(String),

    /// Series truncation is too short for the requested certified computation.
    #[error("insufficient series order: {0}")]
    InsufficientOrder(String),

    /// Unsupported modular-polynomial level.
    #[error("unsupported modular-polynomial level {0} (supported: 1..=5)")]
    UnsupportedLevel(u32),

    /// A cached modular polynomial failed its substitution re-check.
    #[error("cached modular polynomial for level {0} fails verification")]
    CacheMismatch(u32),

    /// reduce-mobius was asked to use a modular relation the ideal does not contain.
    #[error("no modular relation of level {level} between blocks {i} and {k} on the variety")]
    ModularRelationAbsent { i: usize, k: usize, level: u32 },

    /// reduce-fiber was asked to fiber a block with no constant coordinate.
    #[error("block {0} has no constant coordinate")]
    NoConstantCoordinate(usize),

    /// The requested fiber is empty (substitution yields the unit ideal).
    #[error("fiber is empty")]
    FiberEmpty,

    /// Witness lifting hit a singular configuration.
    #[error("lift is singular: {0}")]
    LiftSingular(String),

    /// A variety value violates its documented invariants.
    #[error("invalid variety: {0}")]
    InvalidVariety(String),

    /// A witness value violates its documented invariants.
    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    /// A reduction certificate is internally inconsistent.
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    /// Text-format parse failure. Column 0 means "whole line".
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// I/O failure while reading or writing an interface file.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
