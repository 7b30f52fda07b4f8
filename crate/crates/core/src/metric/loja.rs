//! Empirical Łojasiewicz exponents `|g|^α ≤ |f|`.

use serde::{Deserialize, Serialize};

use super::{norm, sample_points, Field, MetricError, NoFilter, SamplerConfig, Target};
use crate::polycore::{CompiledPoly, Polynomial};

/// Number of extra geometric radii below `cfg.radii[0]` used for sampling.
const EXTRA_RADII: usize = 12;
const EXTRA_RATIO: f64 = 0.75;
/// `|g|` above this multiple of `on_set_tol` where `|f| ≤ on_set_tol`
/// violates `V(f) ⊆ V(g)`.
const VIOLATION_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LojaEstimate {
    pub alpha_hat: f64,
    pub samples_used: usize,
    pub max_attained_at: Vec<f64>,
    /// Factor applied to `g` so that `sup |g| < 1` on the samples.
    pub g_rescale: Option<f64>,
}

/// `(1 + safety) · max log|f| / log|g|` over samples `(|f|, |g|, x)` with
/// `0 < |f| < 1` and `0 < |g| < 1`.
pub fn lojasiewicz_from_pairs(
    samples: &[(f64, f64, Vec<f64>)],
    safety: f64,
) -> Result<LojaEstimate, MetricError> {
    let mut best: Option<(f64, &Vec<f64>)> = None;
    let mut used = 0;
    for (f, g, x) in samples {
        if *f > 0.0 && *f < 1.0 && *g > 0.0 && *g < 1.0 {
            used += 1;
            let ratio = f.ln() / g.ln();
            if best.is_none_or(|(b, _)| ratio > b) {
                best = Some((ratio, x));
            }
        }
    }
    let (ratio, at) = best
        .ok_or_else(|| MetricError::InsufficientData("no sample with 0 < |f|, |g| < 1".into()))?;
    Ok(LojaEstimate {
        alpha_hat: (1.0 + safety) * ratio,
        samples_used: used,
        max_attained_at: at.clone(),
        g_rescale: None,
    })
}

fn loja_radii(cfg: &SamplerConfig) -> Vec<f64> {
    let mut radii: Vec<f64> = cfg.radii.clone();
    let r0 = cfg.radii[0];
    radii.extend((0..EXTRA_RADII).map(|k| r0 * EXTRA_RATIO.powi(k as i32)));
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup();
    radii
}

fn list_norm(ps: &[CompiledPoly], x: &[f64]) -> f64 {
    norm(&ps.iter().map(|p| p.value(x)).collect::<Vec<_>>())
}

/// Estimates the smallest `α` with `|g|^α ≤ |f|` near the origin on
/// `domain`, where `|f|` and `|g|` are Euclidean norms of polynomial lists.
///
/// Samples the domain and `V(f) ∩ domain` on spheres, plus the origin.
/// Fails with `HypothesisViolated` at a sample where `|f| ≤ on_set_tol` but
/// `|g|` is far from zero. When `sup |g| ≥ 1`, `g` is rescaled by
/// `1 / (2 sup |g|)` and the factor is recorded.
pub fn estimate_lojasiewicz(
    f: &[Polynomial],
    g: &[Polynomial],
    domain: &Target,
    cfg: &SamplerConfig,
) -> Result<LojaEstimate, MetricError> {
    cfg.validate()?;
    let n = domain.nvars;
    for p in f.iter().chain(g) {
        if p.nvars() != n {
            return Err(MetricError::DimensionMismatch {
                expected: n,
                got: p.nvars(),
            });
        }
    }
    let fc: Vec<CompiledPoly> = f.iter().map(CompiledPoly::new).collect();
    let gc: Vec<CompiledPoly> = g.iter().map(CompiledPoly::new).collect();
    let mut on_vf = domain.clone();
    for sys in &mut on_vf.pieces {
        sys.equations.extend(f.iter().map(Field::poly));
    }
    let mut points = vec![vec![0.0; n]];
    for r in loja_radii(cfg) {
        points.extend(sample_points(domain, r, cfg, &NoFilter).points);
        points.extend(sample_points(&on_vf, r, cfg, &NoFilter).points);
    }
    let mut samples: Vec<(f64, f64, Vec<f64>)> = Vec::with_capacity(points.len());
    for x in points {
        let fa = list_norm(&fc, &x);
        let ga = list_norm(&gc, &x);
        if fa <= cfg.on_set_tol && ga > VIOLATION_FACTOR * cfg.on_set_tol {
            return Err(MetricError::HypothesisViolated {
                point: x,
                f_abs: fa,
                g_abs: ga,
            });
        }
        samples.push((fa, ga, x));
    }
    let gmax = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let rescale = (gmax >= 1.0).then(|| 0.5 / gmax);
    if let Some(c) = rescale {
        samples.iter_mut().for_each(|s| s.1 *= c);
    }
    let mut est = lojasiewicz_from_pairs(&samples, cfg.loja_safety)?;
    est.g_rescale = rescale;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::System;
    use crate::polycore::parse;

    fn line() -> (Vec<String>, Target) {
        let v = vec!["x".to_string()];
        (
            v,
            Target::new(1, vec![System::from_polys(1, &[], &[])], "R"),
        )
    }

    fn est(f: &str, g: &str) -> Result<LojaEstimate, MetricError> {
        let (v, dom) = line();
        let cfg = SamplerConfig {
            samples_per_radius: 20,
            ..SamplerConfig::default()
        };
        estimate_lojasiewicz(
            &[parse(f, &v).unwrap()],
            &[parse(g, &v).unwrap()],
            &dom,
            &cfg,
        )
    }

    #[test]
    fn calibration_examples() {
        assert!((est("x", "x^2").unwrap().alpha_hat - 0.55).abs() < 1e-12);
        assert!((est("x", "x").unwrap().alpha_hat - 1.1).abs() < 1e-12);
        assert!((est("x^2", "x").unwrap().alpha_hat - 2.2).abs() < 1e-12);
    }

    #[test]
    fn constant_g_violates_the_hypothesis() {
        assert!(matches!(
            est("x", "1/2"),
            Err(MetricError::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn large_g_is_rescaled() {
        let e = est("x^2", "100*x").unwrap();
        assert!(e.g_rescale.is_some());
    }
}
