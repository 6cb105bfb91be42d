//! Exact arithmetic for arithmetic divisors on `Spec Z`, rational adeles, the
//! metrized Picard monoid and its Jacobian, framed and rooted divisors,
//! abelian class-field covers, and a desk-scale numerical check of the Weil
//! explicit formula for the Riemann zeta function.
//!
//! Everything outside [`explicit_formula`] is exact: rationals are
//! arbitrary-precision and p-adic components carry their precision
//! explicitly.

pub mod adeles;
pub mod arith;
pub mod covers;
pub mod divisors;
pub mod error;
pub mod explicit_formula;
pub mod frames_roots;
pub mod par;
pub mod picard;
mod serde_util;

pub use arith::{Prime, Rational};
pub use error::{Error, Result};
