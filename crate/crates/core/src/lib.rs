//! Dimension-preserving algebraic approximation of semialgebraic germs.
//!
//! The crate is organised bottom-up:
//!
//! * [`polycore`] exact sparse polynomials over the rationals;
//! * [`presentation`] presented semialgebraic sets `{F = 0, h_j >= 0}`, their
//!   regularity checks and a box-counting local dimension estimator;
//! * [`metric`] sphere sampling, directed Hausdorff deltas, contact-order
//!   fitting, horn neighbourhoods and Łojasiewicz exponent estimates;
//! * [`approximator`] the squaring recursion `g' = g^2 - h^m` with a
//!   search-and-verify choice of odd exponents.

pub mod approximator;
pub mod metric;
pub mod polycore;
pub mod presentation;
