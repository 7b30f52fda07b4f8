//! Numerical s-equivalence engine.
//!
//! Sets are sampled on spheres `S_r` by projected Gauss-Newton, and compared
//! through directed Hausdorff deltas between the resulting slices. The
//! direction convention is fixed throughout: `check_leq_s(A, B, ..)` and
//! `delta(from, to)` measure how far points of the first argument are from
//! the second one, i.e. `sup_{a in A ∩ S_r} d(a, B ∩ S_r)`.

mod config;
mod delta;
mod field;
mod horn;
mod index;
mod linalg;
mod loja;
mod sampler;

pub use config::SamplerConfig;
pub use delta::{
    check_equiv, check_equiv_filtered, check_leq_s, check_leq_s_filtered, delta, equiv_from_slices,
    fit_contact_order, leq_from_slices, profile_csv, refined_delta, slice_pair, verdict, Direction,
    Order, RadiusDelta, SEquivReport, SlicePair,
};
pub use field::{BranchField, ChainField, Field, System, Target};
pub use horn::{horn_member, horn_member_cloud};
pub use index::CloudIndex;
pub use linalg::{jacobian_full_rank, unit_row_rank};
pub use loja::{estimate_lojasiewicz, lojasiewicz_from_pairs, LojaEstimate};
pub use sampler::{closest_point, newton_project, sample_on_sphere, sample_points, PointCloud};
pub(crate) use sampler::{refine_on_system, stream_seed};

use thiserror::Error;

use crate::polycore::PolyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("no sample converged on the sphere of radius {radius}")]
    EmptyAtRadius { radius: f64 },
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error("Łojasiewicz hypothesis violated at {point:?}: |f| = {f_abs:e} but |g| = {g_abs:e}")]
    HypothesisViolated {
        point: Vec<f64>,
        f_abs: f64,
        g_abs: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Membership predicate applied to samples before they enter a cloud.
pub trait PointFilter: Sync {
    fn admits(&self, x: &[f64]) -> bool;
}

/// Filter that admits every point.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoFilter;

impl PointFilter for NoFilter {
    fn admits(&self, _x: &[f64]) -> bool {
        true
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}
