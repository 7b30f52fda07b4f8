//! Exact sparse multivariate polynomials over the rationals.
//!
//! Coefficients stay exact through every arithmetic operation; floating point
//! only appears at evaluation time (see [`CompiledPoly`]). Terms are kept in a
//! `BTreeMap` keyed by exponent vectors ordered graded-lexicographically with
//! respect to the declared variable order, so printing and hashing are
//! deterministic.

mod compiled;
mod parse;
mod polynomial;

pub use compiled::CompiledPoly;
pub use parse::parse;
pub use polynomial::{
    compose_linear, jacobian_minors, matrix_rank, Monomial, Polynomial, MAX_DEGREE,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

/// Exact rational coefficient. `BigRational` is always kept in lowest terms
/// with a positive denominator.
pub type Rational = BigRational;

/// Builds a rational from a machine-sized numerator and denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable lists differ: {left:?} vs {right:?}")]
    VariableMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("total degree {0} exceeds the cap of {MAX_DEGREE}")]
    DegreeOverflow(u64),
    #[error("matrix is rank deficient (rank {rank}, need {rows})")]
    RankDeficientMatrix { rank: usize, rows: usize },
    #[error("matrix shape mismatch: {0}")]
    MatrixShape(String),
}
