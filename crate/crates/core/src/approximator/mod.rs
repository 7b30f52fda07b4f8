//! Construction of an algebraic s-approximation of a regular presented set.
//!
//! A regular presentation `{f_0 = 0, f̃ = 0, h_1 >= 0, …, h_q >= 0}` is turned
//! into equations by the squaring recursion
//! `g_0 = f_0`, `g_i = g_{i-1}^2 - h_i^{m_i}` with odd `m_i`. Each exponent is
//! the smallest odd integer, starting from a Łojasiewicz hint, whose stage
//! passes the s-comparison with the previous stage outside a thin horn around
//! the exceptional set `X = (Σ(F) ∪ ⋃ V(h_j)) ∩ A`.

mod kfilter;
mod ops;
mod run;
mod search;
mod stages;

pub use kfilter::KFilterSummary;
pub use kfilter::{build_k_filter, KFilter};
pub use ops::{
    augment_ball_inequality, ball_inequality, generic_projection, step_combine, Projection,
    ProjectionRecord,
};
pub use run::{
    approximate_piece, run, screen_candidate, union_equations, ApproximationResult, RunOutput,
    ScreenResult,
};
pub use search::{
    choose_exponent, exponent_hint, Criterion, SearchContext, StepRecord, TrialFailure,
};
pub use stages::Stages;

use thiserror::Error;

use crate::metric::{MetricError, SamplerConfig};
use crate::polycore::PolyError;
use crate::presentation::PresentationError;

/// Settings of one approximation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxConfig {
    pub sampler: SamplerConfig,
    /// Largest odd exponent tried in each step.
    pub max_exponent: u32,
    /// Random projection matrices tried before giving up.
    pub max_projection_tries: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            sampler: SamplerConfig::default(),
            max_exponent: 99,
            max_projection_tries: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproxError {
    #[error("piece {piece} has no equations or full dimension; it is open near the origin")]
    CodimensionZero { piece: usize },
    #[error("piece {piece} has {got} equations but codimension {needed}")]
    TooFewEquations {
        piece: usize,
        got: usize,
        needed: usize,
    },
    #[error("no generic projection found in {tries} tries")]
    ProjectionSearchExhausted { tries: usize },
    #[error("piece {piece} is not regular: {}", reasons.join("; "))]
    RegularityRejected { piece: usize, reasons: Vec<String> },
    #[error(
        "piece {piece}, step {step}: no exponent up to {max_exponent} passes ({})",
        failures.iter().map(|f| format!("m = {}: {}", f.m, f.detail)).collect::<Vec<_>>().join("; ")
    )]
    ExponentSearchExhausted {
        piece: usize,
        step: usize,
        max_exponent: u32,
        failures: Vec<TrialFailure>,
    },
    #[error("exponent {0} must be odd")]
    EvenExponent(u32),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
