//! Box-counting estimate of the local dimension at the origin.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{PresentationError, SetDescription};
use crate::metric::{sample_points, NoFilter, PointCloud, PointFilter, SamplerConfig, Target};

/// Boxes per bounding-box diagonal at the coarse scale.
const BOXES_PER_DIAMETER: f64 = 16.0;
/// Grid offsets, in units of the box side, averaged over.
const GRID_OFFSETS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];
/// Slices whose diameter is at most this fraction of the radius count as
/// finitely many points.
const POINT_LIKE: f64 = 1e-3;
/// Largest allowed spread between the slopes of nonempty radii.
const MAX_SLOPE_SPREAD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// Estimated `dim_O`.
    pub dimension: usize,
    /// Box-counting slope per radius; `None` where the slice is empty.
    pub slopes: Vec<Option<f64>>,
    /// `dim_O` voted by each radius (an empty slice votes 0).
    pub votes: Vec<usize>,
    /// No sample was found at any radius.
    pub empty_near_origin: bool,
}

fn box_count(points: &[Vec<f64>], lo: &[f64], eps: f64) -> f64 {
    let total: usize = GRID_OFFSETS
        .iter()
        .map(|&off| {
            points
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(lo)
                        .map(|(x, l)| ((x - l) / eps + off).floor() as i64)
                        .collect::<Vec<_>>()
                })
                .collect::<HashSet<_>>()
                .len()
        })
        .sum();
    total as f64 / GRID_OFFSETS.len() as f64
}

/// `log2(N(ε/2) / N(ε))` for boxes of side `ε = diameter / 16`, each count
/// averaged over shifted grids. Slices that are finitely many points at
/// resolution `r·1e-3` have slope 0.
pub fn box_counting_slope(points: &[Vec<f64>], r: f64) -> f64 {
    if points.len() <= 1 {
        return 0.0;
    }
    let n = points[0].len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in points {
        for k in 0..n {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let diam = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    if diam <= POINT_LIKE * r {
        return 0.0;
    }
    let eps = diam / BOXES_PER_DIAMETER;
    (box_count(points, &lo, eps / 2.0) / box_count(points, &lo, eps)).log2()
}

/// Dimension vote from sphere slices of one set in `R^n`.
///
/// A nonempty slice votes `round(slope) + 1` with the slice dimension
/// clamped to `[0, n - 1]`; an empty slice votes 0. The most frequent vote
/// wins, ties going to the larger dimension.
pub fn dimension_from_slices(
    slices: &[PointCloud],
    n: usize,
) -> Result<DimensionEstimate, PresentationError> {
    let slopes: Vec<Option<f64>> = slices
        .iter()
        .map(|c| (!c.is_empty()).then(|| box_counting_slope(&c.points, c.radius)))
        .collect();
    let present: Vec<f64> = slopes.iter().flatten().copied().collect();
    if present.is_empty() {
        return Ok(DimensionEstimate {
            dimension: 0,
            votes: vec![0; slices.len()],
            slopes,
            empty_near_origin: true,
        });
    }
    let spread = present.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - present.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread > MAX_SLOPE_SPREAD {
        return Err(PresentationError::InconsistentVotes { slopes: present });
    }
    let votes: Vec<usize> = slopes
        .iter()
        .map(|s| match s {
            Some(v) => (v.round().max(0.0) as usize).min(n.saturating_sub(1)) + 1,
            None => 0,
        })
        .collect();
    let mut tally: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in &votes {
        *tally.entry(v).or_default() += 1;
    }
    let dimension = tally
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)))
        .map(|(&d, _)| d)
        .unwrap_or(0);
    Ok(DimensionEstimate {
        dimension,
        slopes,
        votes,
        empty_near_origin: false,
    })
}

/// Local dimension of `target` (restricted to points the filter admits),
/// from slices at `cfg.dimension_radii`.
pub fn estimate_target_dimension(
    target: &Target,
    cfg: &SamplerConfig,
    filter: &dyn PointFilter,
) -> Result<DimensionEstimate, PresentationError> {
    cfg.validate()?;
    let slices: Vec<PointCloud> = cfg
        .dimension_radii
        .iter()
        .map(|&r| sample_points(target, r, cfg, filter))
        .collect();
    dimension_from_slices(&slices, target.nvars)
}

/// `dim_O` of a described set by box counting on sphere slices.
pub fn estimate_local_dimension(
    set: &SetDescription,
    cfg: &SamplerConfig,
) -> Result<DimensionEstimate, PresentationError> {
    estimate_target_dimension(&set.target("set"), cfg, &NoFilter)
}
