//! Exact-arithmetic engine for the rank-one double affine Hecke algebra,
//! the quadratic algebra generated by the Askey-Wilson difference operator
//! and multiplication by `z + z^-1`, and the (non-)symmetric Askey-Wilson
//! polynomial families.
//!
//! Everything runs over arbitrary-precision rationals: operator identities,
//! eigenvalue equations, normal-form reductions and rank computations are
//! all decided exactly, never numerically.
//!
//! - [`coeff`]: parameter packs, validation, structure constants, scalars
//! - [`laurent`]: sparse Laurent polynomials, substitutions, exact division
//! - [`operators`]: the difference-reflection operators and compositions
//! - [`polyfamilies`]: the polynomial families `P`, `Q`, `P†`, `Q†`, `E`
//! - [`ncalg`]: free algebras, rewrite systems, Casimir elements, embedding
//! - [`verify`]: representation maps and the executable identity suites

pub mod coeff;
pub mod error;
pub mod laurent;
pub mod ncalg;
pub mod operators;
pub mod polyfamilies;
pub mod verify;

pub use coeff::{Coef, ParamPack};
pub use error::{Error, Result};
pub use laurent::LaurentPoly;
