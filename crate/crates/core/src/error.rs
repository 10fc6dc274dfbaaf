//! Error type shared by all modules.

use crate::ncalg::AlgebraId;

/// Errors produced by the engine. Everything is exact, so there are no
/// numerical-tolerance failures: an error either names a degenerate
/// parameter choice or signals an internal fault.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// The parameters violate a nondegeneracy condition. The message names
    /// the violated condition, e.g. `"q = 1"` or `"abcd = q^-2"`.
    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),

    /// An exact Laurent division left a remainder. Operators are guaranteed
    /// to map Laurent polynomials to Laurent polynomials, so this signals a
    /// degenerate parameter pack or an implementation fault upstream.
    #[error("not divisible: {0}")]
    NotDivisible(String),

    /// A rewrite run exceeded its step budget. The reduction orders are
    /// terminating, so this only fires on a rule-ordering bug.
    #[error("rewrite step budget exceeded: {0}")]
    NonTermination(String),

    /// Two noncommutative polynomials over different algebras were combined.
    #[error("algebra mismatch: expected {expected:?}, got {got:?}")]
    AlgebraMismatch { expected: AlgebraId, got: AlgebraId },

    /// Malformed textual input (CLI expressions, family tags, words).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
