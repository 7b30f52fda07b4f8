//! Sphere sampling and nearest-point refinement.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::linalg::{min_norm_solve, project_out};
use super::{dist, norm, Field, MetricError, PointFilter, SamplerConfig, System, Target};

/// Samples of `A ∩ S_r` for one set `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub radius: f64,
    pub points: Vec<Vec<f64>>,
    /// Index of the piece each point was sampled from.
    pub pieces: Vec<usize>,
    pub set_ref: String,
}

impl PointCloud {
    pub fn new(radius: f64, points: Vec<Vec<f64>>, set_ref: impl Into<String>) -> Self {
        let pieces = vec![0; points.len()];
        PointCloud {
            radius,
            points,
            pieces,
            set_ref: set_ref.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn stream_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix(seed), |acc, &p| splitmix(acc ^ p))
}

fn rescale(x: &mut [f64], r: f64) {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v *= r / n);
    }
}

/// Consecutive steps with cosine above this and length ratio `q` in
/// `[GEOMETRIC_MIN, GEOMETRIC_MAX)` are extrapolated by `1 / (1 - q)`.
const ALIGNED: f64 = 0.999;
const GEOMETRIC_MIN: f64 = 0.5;
const GEOMETRIC_MAX: f64 = 0.99;

/// Multiple of the rounding error bound within which a residual counts as zero.
const SETTLE: f64 = 64.0;

/// Gauss-Newton projection of `start` onto `{eqs = 0}`, optionally
/// restricted to the sphere of radius `sphere`.
///
/// Each row is the (tangential, when on a sphere) gradient scaled to unit
/// length, so the residual `|E_i| / ‖∇E_i‖` is a first-order distance to
/// the zero set of `E_i`. A point is returned only when every such residual
/// is at most `cfg.newton_tol` and every `|E_i|` is at most
/// `cfg.on_set_tol`, and every `|E_i|` is within 64 times its
/// rounding error bound, including the error from rounding the point. Rows whose gradient is at most
/// `cfg.zero_gradient_tol` times the field's gradient scale at radius
/// `scale` count as satisfied when the value is within tolerance.
pub fn newton_project(
    eqs: &[&Field],
    start: &[f64],
    sphere: Option<f64>,
    scale: f64,
    cfg: &SamplerConfig,
) -> Option<Vec<f64>> {
    let n = start.len();
    let mut x = start.to_vec();
    if let Some(r) = sphere {
        rescale(&mut x, r);
    }
    if eqs.is_empty() {
        return Some(x);
    }
    let zero_tol: Vec<f64> = eqs
        .iter()
        .map(|e| cfg.zero_gradient_tol * e.gradient_scale(scale))
        .collect();
    let mut g = vec![0.0; n];
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(eqs.len());
    let mut rhs = Vec::with_capacity(eqs.len());
    let mut prev: Option<(Vec<f64>, f64)> = None;
    for iter in 0..=cfg.newton_max_iter {
        rows.clear();
        rhs.clear();
        let mut converged = true;
        for (e, &zt) in eqs.iter().zip(&zero_tol) {
            let (v, err) = e.value_grad_err(&x, &mut g);
            if !v.is_finite() {
                return None;
            }
            let point_err =
                4.0 * f64::EPSILON * g.iter().zip(&x).map(|(a, b)| (a * b).abs()).sum::<f64>();
            if v.abs() > SETTLE * (err + point_err) {
                converged = false;
            }
            if sphere.is_some() {
                let c = g.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()
                    / x.iter().map(|b| b * b).sum::<f64>();
                g.iter_mut().zip(&x).for_each(|(a, b)| *a -= c * b);
            }
            let gn = norm(&g);
            if v.abs() > cfg.on_set_tol {
                converged = false;
            }
            if gn.is_nan() || gn <= zt {
                if v.abs() > cfg.on_set_tol {
                    return None;
                }
                continue;
            }
            if v.abs() / gn > cfg.newton_tol {
                converged = false;
            }
            rows.push(g.iter().map(|a| a / gn).collect());
            rhs.push(-v / gn);
        }
        if converged {
            return Some(x);
        }
        if iter == cfg.newton_max_iter {
            break;
        }
        let mut d = min_norm_solve(&rows, &rhs, n);
        let mut dn = norm(&d);
        if let Some((pd, pn)) = &prev {
            let q = dn / pn;
            let cos = d.iter().zip(pd).map(|(a, b)| a * b).sum::<f64>() / (dn * pn);
            if cos > ALIGNED && (GEOMETRIC_MIN..GEOMETRIC_MAX).contains(&q) {
                let k = 1.0 / (1.0 - q);
                d.iter_mut().for_each(|v| *v *= k);
                dn *= k;
            }
        }
        prev = Some((d.clone(), dn));
        let cap = 0.5 * scale;
        if dn > cap {
            d.iter_mut().for_each(|v| *v *= cap / dn);
        }
        x.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
        if let Some(r) = sphere {
            rescale(&mut x, r);
        }
    }
    None
}

/// Samples `target ∩ S_r`, keeping points the filter admits.
///
/// Starts are standard-normal directions scaled to `r`, drawn from a
/// ChaCha8 stream keyed by `(cfg.seed, piece, r)`. Accepted points satisfy
/// every inequality up to `cfg.on_set_tol` and are deduplicated on a grid of
/// side `r·1e-4`. The output order depends only on the seed and config.
pub fn sample_points(
    target: &Target,
    r: f64,
    cfg: &SamplerConfig,
    filter: &dyn PointFilter,
) -> PointCloud {
    let n = target.nvars;
    let mut seen = BTreeSet::new();
    let mut points = Vec::new();
    let mut pieces = Vec::new();
    let cell = r * 1e-4;
    for (pi, sys) in target.pieces.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, &[pi as u64, r.to_bits()]));
        let starts: Vec<Vec<f64>> = (0..cfg.samples_per_radius)
            .map(|_| {
                let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                rescale(&mut v, r);
                v
            })
            .collect();
        let eqs: Vec<&Field> = sys.equations.iter().collect();
        let found: Vec<Option<Vec<f64>>> = starts
            .par_iter()
            .map(|s| {
                newton_project(&eqs, s, Some(r), r, cfg)
                    .filter(|x| sys.feasible(x, cfg.on_set_tol) && filter.admits(x))
            })
            .collect();
        for x in found.into_iter().flatten() {
            let key: Vec<i64> = x.iter().map(|v| (v / cell).round() as i64).collect();
            if seen.insert(key) {
                points.push(x);
                pieces.push(pi);
            }
        }
    }
    PointCloud {
        radius: r,
        points,
        pieces,
        set_ref: target.label.clone(),
    }
}

/// Like [`sample_points`] but an empty slice is an error.
pub fn sample_on_sphere(
    target: &Target,
    r: f64,
    cfg: &SamplerConfig,
    filter: &dyn PointFilter,
) -> Result<PointCloud, MetricError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(MetricError::InvalidConfig(format!(
            "radius {r} must lie in (0, 1)"
        )));
    }
    let cloud = sample_points(target, r, cfg, filter);
    if cloud.is_empty() {
        return Err(MetricError::EmptyAtRadius { radius: r });
    }
    Ok(cloud)
}

const CLOSEST_MAX_ITER: usize = 40;
const CLOSEST_HALVINGS: usize = 6;

/// Local minimizer of `‖y - query‖` over `{eqs = 0}` (intersected with the
/// sphere of radius `sphere` when given), starting from `start`.
///
/// Each iteration moves along the component of `query - y` tangent to the
/// set, projects back with [`newton_project`], and halves the step until
/// the distance decreases. Returns `None` when `start` cannot be projected.
pub fn closest_point(
    query: &[f64],
    eqs: &[&Field],
    start: &[f64],
    sphere: Option<f64>,
    scale: f64,
    cfg: &SamplerConfig,
) -> Option<Vec<f64>> {
    let n = query.len();
    let mut y = newton_project(eqs, start, sphere, scale, cfg)?;
    let mut best = dist(&y, query);
    let mut g = vec![0.0; n];
    for _ in 0..CLOSEST_MAX_ITER {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(eqs.len() + 1);
        for e in eqs {
            e.value_grad(&y, &mut g);
            let gn = norm(&g);
            if gn > 0.0 {
                rows.push(g.iter().map(|a| a / gn).collect());
            }
        }
        if sphere.is_some() {
            let yn = norm(&y);
            rows.push(y.iter().map(|a| a / yn).collect());
        }
        let v: Vec<f64> = query.iter().zip(&y).map(|(a, b)| a - b).collect();
        let mut t = project_out(&v, &rows);
        if norm(&t) <= 1e-13 * scale {
            break;
        }
        let mut improved = false;
        for _ in 0..=CLOSEST_HALVINGS {
            let trial: Vec<f64> = y.iter().zip(&t).map(|(a, b)| a + b).collect();
            if let Some(z) = newton_project(eqs, &trial, sphere, scale, cfg) {
                let d = dist(&z, query);
                if d < best {
                    best = d;
                    y = z;
                    improved = true;
                    break;
                }
            }
            t.iter_mut().for_each(|a| *a *= 0.5);
        }
        if !improved {
            break;
        }
    }
    Some(y)
}

/// Nearest feasible, admitted point of `sys` found from `start`.
///
/// When the unconstrained local minimizer violates an inequality, each
/// inequality is tried as an active equation.
pub(crate) fn refine_on_system(
    query: &[f64],
    sys: &System,
    start: &[f64],
    sphere: Option<f64>,
    scale: f64,
    cfg: &SamplerConfig,
    filter: &dyn PointFilter,
) -> Option<f64> {
    let mut eqs: Vec<&Field> = sys.equations.iter().collect();
    let ok = |y: &Vec<f64>| sys.feasible(y, cfg.on_set_tol) && filter.admits(y);
    if let Some(y) = closest_point(query, &eqs, start, sphere, scale, cfg) {
        if ok(&y) {
            return Some(dist(&y, query));
        }
    }
    let mut best: Option<f64> = None;
    for h in &sys.inequalities {
        eqs.push(h);
        if let Some(y) = closest_point(query, &eqs, start, sphere, scale, cfg) {
            if ok(&y) {
                let d = dist(&y, query);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        eqs.pop();
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::NoFilter;
    use crate::polycore::parse;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn target(v: &[String], eqs: &[&str], ineqs: &[&str]) -> Target {
        let e: Vec<_> = eqs.iter().map(|s| parse(s, v).unwrap()).collect();
        let h: Vec<_> = ineqs.iter().map(|s| parse(s, v).unwrap()).collect();
        Target::new(v.len(), vec![System::from_polys(v.len(), &e, &h)], "t")
    }

    fn small_cfg() -> SamplerConfig {
        SamplerConfig {
            samples_per_radius: 200,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn x_axis_slice_is_two_points() {
        let v = vars(&["x", "y"]);
        let t = target(&v, &["y"], &[]);
        let c = sample_on_sphere(&t, 0.5, &small_cfg(), &NoFilter).unwrap();
        assert_eq!(c.len(), 2);
        for p in &c.points {
            assert!((p[0].abs() - 0.5).abs() < 1e-12 && p[1].abs() < 1e-12);
        }
    }

    #[test]
    fn quadrant_slice_satisfies_constraints() {
        let v = vars(&["x", "y", "z"]);
        let t = target(&v, &["z"], &["x", "y"]);
        let cfg = small_cfg();
        let c = sample_on_sphere(&t, 0.1, &cfg, &NoFilter).unwrap();
        assert!(c.len() > 20);
        for p in &c.points {
            assert!(p[2].abs() <= cfg.on_set_tol);
            assert!(p[0] >= -cfg.on_set_tol && p[1] >= -cfg.on_set_tol);
            assert!((norm(p) - 0.1).abs() <= 10.0 * cfg.newton_tol);
        }
    }

    #[test]
    fn isolated_origin_is_empty_at_radius() {
        let v = vars(&["x", "y"]);
        let t = target(&v, &["x^2 + y^2"], &[]);
        assert_eq!(
            sample_on_sphere(&t, 0.1, &small_cfg(), &NoFilter),
            Err(MetricError::EmptyAtRadius { radius: 0.1 })
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let v = vars(&["x", "y", "z"]);
        let t = target(&v, &["z^2 - x^3"], &[]);
        let cfg = small_cfg();
        let a = sample_on_sphere(&t, 0.2, &cfg, &NoFilter).unwrap();
        let b = sample_on_sphere(&t, 0.2, &cfg, &NoFilter).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn closest_point_on_free_line() {
        let v = vars(&["x", "y"]);
        let t = target(&v, &["y"], &[]);
        let eqs: Vec<&Field> = t.pieces[0].equations.iter().collect();
        let cfg = small_cfg();
        // Closest point of the free line y = 0 to (0.3, 0.01) is (0.3, 0).
        let y = closest_point(&[0.3, 0.01], &eqs, &[0.1, 0.0], None, 0.3, &cfg).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-10 && y[1].abs() < 1e-12);
    }
}
