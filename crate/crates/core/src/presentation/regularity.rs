//! Numeric checks that a presentation is regular: `n - d` equations, a
//! critical locus of dimension `< d` on the set, and inequality zero loci of
//! dimension `< d` on the set.
//!
//! The critical locus `Σ(F) ∩ A` is sampled as the semialgebraic set cut out
//! by `F` together with all maximal minors of `dF`, so its dimension is
//! estimated like any other set.

use serde::{Deserialize, Serialize};

use super::{dimension_from_slices, estimate_target_dimension, Presentation, PresentationError};
use crate::metric::{sample_points, Field, NoFilter, PointCloud, SamplerConfig};
use crate::polycore::jacobian_minors;

/// Rank-deficient sample points kept in a report.
const MAX_REPORTED_VIOLATIONS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub index: usize,
    pub expr: String,
    /// Estimated `dim_O (V(h_j) ∩ A)`; 0 when empty near the origin.
    pub dimension: usize,
    pub empty_near_origin: bool,
    /// `|h_j| ≤ on_set_tol` on every sample of `A`.
    pub vanishes_on_set: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// The `d` checked against: declared if present, else estimated.
    pub dimension: usize,
    pub estimated_dimension: Option<usize>,
    pub rank_ok: bool,
    pub rank_violations: Vec<Vec<f64>>,
    /// Estimated dimension of the rank-deficient samples, if any were found.
    pub critical_dimension: Option<usize>,
    pub inequality_dims: Vec<InequalityCheck>,
    pub verdict: bool,
    pub warnings: Vec<String>,
}

impl RegularityReport {
    /// Human-readable reasons for a failed verdict.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.rank_ok {
            out.push(format!(
                "critical locus has dimension {:?}, need < {}",
                self.critical_dimension, self.dimension
            ));
        }
        for c in &self.inequality_dims {
            if c.vanishes_on_set {
                out.push(format!(
                    "inequality `{}` vanishes identically on the set",
                    c.expr
                ));
            } else if !c.empty_near_origin && c.dimension >= self.dimension {
                out.push(format!(
                    "V({}) meets the set in dimension {}, need < {}",
                    c.expr, c.dimension, self.dimension
                ));
            }
        }
        out
    }
}

fn slices(p: &Presentation, cfg: &SamplerConfig) -> Vec<PointCloud> {
    let t = p.target("A");
    cfg.dimension_radii
        .iter()
        .map(|&r| sample_points(&t, r, cfg, &NoFilter))
        .collect()
}

fn vanishing(p: &Presentation, slices: &[PointCloud], cfg: &SamplerConfig) -> Vec<bool> {
    let any = slices.iter().any(|c| !c.is_empty());
    p.inequalities
        .iter()
        .map(|h| {
            let f = Field::poly(h);
            any && slices
                .iter()
                .flat_map(|c| &c.points)
                .all(|x| f.value(x).abs() <= cfg.on_set_tol)
        })
        .collect()
}

pub fn check_regularity(
    p: &Presentation,
    cfg: &SamplerConfig,
) -> Result<RegularityReport, PresentationError> {
    cfg.validate()?;
    let n = p.nvars();
    let mut warnings = Vec::new();
    let estimated = match estimate_target_dimension(&p.target("A"), cfg, &NoFilter) {
        Ok(e) => Some(e.dimension),
        Err(PresentationError::InconsistentVotes { slopes }) => {
            warnings.push(format!(
                "dimension estimate inconclusive, slopes {slopes:?}"
            ));
            None
        }
        Err(e) => return Err(e),
    };
    let d = match (p.declared_dimension, estimated) {
        (Some(d), est) => {
            if est.is_some_and(|e| e != d) {
                warnings.push(format!(
                    "declared dimension {d} differs from the estimate {}",
                    est.unwrap_or_default()
                ));
            }
            d
        }
        (None, Some(e)) => e,
        (None, None) => {
            return Err(PresentationError::Schema(
                "no declared_dimension and the estimate is inconclusive".into(),
            ))
        }
    };
    if p.equations.len() + d != n {
        return Err(PresentationError::WrongCodimension {
            expected: n.saturating_sub(d),
            got: p.equations.len(),
        });
    }

    let a_slices = slices(p, cfg);
    let mut critical_set = p.clone();
    critical_set
        .equations
        .extend(jacobian_minors(&p.equations)?);
    let deficient = slices(&critical_set, cfg);
    let rank_violations: Vec<Vec<f64>> = deficient
        .iter()
        .flat_map(|c| c.points.iter().cloned())
        .take(MAX_REPORTED_VIOLATIONS)
        .collect();
    let critical = dimension_from_slices(&deficient, n)?;
    let critical_dimension = (!critical.empty_near_origin).then_some(critical.dimension);
    let rank_ok = critical_dimension.is_none_or(|c| c < d);

    let vanish = vanishing(p, &a_slices, cfg);
    let mut inequality_dims = Vec::with_capacity(p.inequalities.len());
    for (j, h) in p.inequalities.iter().enumerate() {
        let est = estimate_target_dimension(&p.boundary(j).target("boundary"), cfg, &NoFilter)?;
        inequality_dims.push(InequalityCheck {
            index: j,
            expr: h.to_string(),
            dimension: est.dimension,
            empty_near_origin: est.empty_near_origin,
            vanishes_on_set: vanish[j],
        });
    }
    let verdict = rank_ok
        && inequality_dims
            .iter()
            .all(|c| !c.vanishes_on_set && (c.empty_near_origin || c.dimension < d));
    Ok(RegularityReport {
        dimension: d,
        estimated_dimension: estimated,
        rank_ok,
        rank_violations,
        critical_dimension,
        inequality_dims,
        verdict,
        warnings,
    })
}

/// Removes inequalities that vanish on every sample of the set; returns the
/// reduced presentation and the removed indices.
pub fn drop_vanishing_inequalities(
    p: &Presentation,
    cfg: &SamplerConfig,
) -> Result<(Presentation, Vec<usize>), PresentationError> {
    cfg.validate()?;
    let vanish = vanishing(p, &slices(p, cfg), cfg);
    let mut out = p.clone();
    out.inequalities = p
        .inequalities
        .iter()
        .zip(&vanish)
        .filter(|(_, &v)| !v)
        .map(|(h, _)| h.clone())
        .collect();
    let dropped = (0..vanish.len()).filter(|&j| vanish[j]).collect();
    Ok((out, dropped))
}
