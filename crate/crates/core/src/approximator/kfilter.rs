//! Exclusion of the horn `H(X, σ_K)` around the exceptional set
//! `X = (Σ(F) ∪ ⋃_j V(h_j)) ∩ A`.

use serde::{Deserialize, Serialize};

use super::ApproxError;
use crate::metric::{
    norm, refine_on_system, sample_points, CloudIndex, NoFilter, PointFilter, SamplerConfig,
    System, Target,
};
use crate::polycore::{jacobian_minors, Polynomial};
use crate::presentation::Presentation;

/// Cloud points used as refinement starts.
const NEIGHBOURS: usize = 3;
/// Points farther than this multiple of `‖x‖` beyond the horn bound, by
/// cloud distance, are admitted without refinement.
const REFINE_WINDOW: f64 = 0.05;

/// Summary of a filter for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFilterSummary {
    pub sigma: f64,
    /// Systems whose union is `X`, as equation strings.
    pub systems: Vec<Vec<String>>,
    /// Samples of `X` per radius.
    pub samples: Vec<(f64, usize)>,
}

/// `K = complement of {x : d(x, X) < ‖x‖^σ}`.
///
/// `d(x, X)` is bounded above by the nearest sample of `X` on the closest
/// sampled sphere and by nearest-point refinement onto each system of `X`.
pub struct KFilter {
    pub sigma: f64,
    x: Target,
    slots: Vec<CloudIndex>,
    descriptions: Vec<Vec<String>>,
    cfg: SamplerConfig,
}

impl KFilter {
    pub fn summary(&self) -> KFilterSummary {
        KFilterSummary {
            sigma: self.sigma,
            systems: self.descriptions.clone(),
            samples: self
                .slots
                .iter()
                .map(|s| (s.cloud.radius, s.cloud.len()))
                .collect(),
        }
    }

    fn slot(&self, r: f64) -> Option<&CloudIndex> {
        self.slots.iter().min_by(|a, b| {
            let da = (a.cloud.radius.ln() - r.ln()).abs();
            let db = (b.cloud.radius.ln() - r.ln()).abs();
            da.total_cmp(&db)
        })
    }

    fn horn_member(&self, x: &[f64]) -> bool {
        let r = norm(x);
        if r == 0.0 || self.x.pieces.is_empty() {
            return false;
        }
        let bound = r.powf(self.sigma);
        let Some(slot) = self.slot(r) else {
            return false;
        };
        let near = slot.nearest(x, NEIGHBOURS);
        let cloud_d = near.first().map_or(f64::INFINITY, |&(d, _)| d);
        if cloud_d < bound {
            return true;
        }
        let window = bound + REFINE_WINDOW * r + (slot.cloud.radius - r).abs();
        if cloud_d > window {
            return false;
        }
        let close = |d: Option<f64>| d.is_some_and(|d| d < bound);
        self.x.pieces.iter().enumerate().any(|(pi, sys)| {
            close(refine_on_system(x, sys, x, None, r, &self.cfg, &NoFilter))
                || near.iter().any(|&(_, j)| {
                    slot.cloud.pieces[j] == pi
                        && close(refine_on_system(
                            x,
                            sys,
                            &slot.cloud.points[j],
                            None,
                            r,
                            &self.cfg,
                            &NoFilter,
                        ))
                })
        })
    }
}

impl PointFilter for KFilter {
    fn admits(&self, x: &[f64]) -> bool {
        !self.horn_member(x)
    }
}

fn describe(eqs: &[Polynomial]) -> Vec<String> {
    eqs.iter().map(|p| p.to_string()).collect()
}

/// Filter for the regular presentation `pres` with `σ_K = s + 1`.
///
/// `X` is the union of the boundary systems `{F = 0, h_j = 0, h_k >= 0}` and,
/// unless `dF` has a constant nonzero maximal minor, the critical system
/// `{F = 0, minors of dF = 0, h >= 0}`. It is sampled at every radius of
/// `cfg.radii` and `cfg.dimension_radii`.
pub fn build_k_filter(
    pres: &Presentation,
    s: f64,
    cfg: &SamplerConfig,
) -> Result<KFilter, ApproxError> {
    cfg.validate()?;
    let n = pres.nvars();
    let mut systems: Vec<System> = Vec::new();
    let mut descriptions = Vec::new();
    for j in 0..pres.inequalities.len() {
        let b = pres.boundary(j);
        systems.push(b.system());
        descriptions.push(describe(&b.equations));
    }
    let minors = jacobian_minors(&pres.equations)?;
    if !minors.iter().any(|m| m.degree() == 0) {
        let mut eqs = pres.equations.clone();
        eqs.extend(minors);
        systems.push(System::from_polys(n, &eqs, &pres.inequalities));
        descriptions.push(describe(&eqs));
    }
    let x = Target::new(n, systems, "X");
    let mut radii: Vec<f64> = cfg
        .radii
        .iter()
        .chain(&cfg.dimension_radii)
        .copied()
        .collect();
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup();
    let slots = if x.pieces.is_empty() {
        Vec::new()
    } else {
        radii
            .iter()
            .map(|&r| CloudIndex::new(sample_points(&x, r, cfg, &NoFilter)))
            .collect()
    };
    Ok(KFilter {
        sigma: s + 1.0,
        x,
        slots,
        descriptions,
        cfg: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::parse;

    fn pres(vars: &[&str], eqs: &[&str], ineqs: &[&str]) -> Presentation {
        let v: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let e = eqs.iter().map(|s| parse(s, &v).unwrap()).collect();
        let h = ineqs.iter().map(|s| parse(s, &v).unwrap()).collect();
        Presentation::new(v, e, h, None).unwrap()
    }

    #[test]
    fn quadrant_filter_excludes_a_thin_horn_around_the_edges() {
        let k = build_k_filter(
            &pres(&["x", "y", "z"], &["z"], &["x", "y"]),
            3.0,
            &SamplerConfig::default(),
        )
        .unwrap();
        assert_eq!(k.sigma, 4.0);
        let r: f64 = 0.1;
        let inside = r.powi(4) * 0.5;
        assert!(!k.admits(&[inside, (r * r - inside * inside).sqrt(), 0.0]));
        let outside = r.powi(4) * 2.0;
        assert!(k.admits(&[outside, (r * r - outside * outside).sqrt(), 0.0]));
        assert!(k.admits(&[0.06, 0.08, 0.0]));
    }

    #[test]
    fn half_line_filter_is_trivial_away_from_the_origin() {
        let k = build_k_filter(
            &pres(&["x1", "x2", "x3"], &["x1", "x2"], &["x3"]),
            2.0,
            &SamplerConfig::default(),
        )
        .unwrap();
        assert!(k.summary().samples.iter().all(|&(_, c)| c == 0));
        assert!(k.admits(&[0.0, 0.0, 0.1]));
        assert!(k.admits(&[1e-6, 0.0, 0.1]));
    }
}
