//! Directed deltas between sphere slices and the s-equivalence verdict.

use std::fmt::Write as _;

use kdtree::distance::squared_euclidean;
use kdtree::KdTree;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::sampler::refine_on_system;
use super::{sample_points, MetricError, NoFilter, PointCloud, PointFilter, SamplerConfig, Target};

/// Fitted contact order: a finite slope or the `+∞` sentinel used when every
/// delta vanishes. Serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Finite(f64),
    Infinite,
}

impl Order {
    pub fn at_least(self, bound: f64) -> bool {
        match self {
            Order::Finite(v) => v >= bound,
            Order::Infinite => true,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Order::Finite(v) => v,
            Order::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Order::Finite(v) => s.serialize_f64(*v),
            Order::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Order::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Order::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid order `{s}`"))),
        }
    }
}

/// Which inequality a report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `A ≤_s B`: points of A are close to B.
    ALeqB,
    /// `B ≤_s A`: points of B are close to A.
    BLeqA,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusDelta {
    pub radius: f64,
    pub delta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SEquivReport {
    pub direction: Direction,
    pub s: f64,
    pub per_radius: Vec<RadiusDelta>,
    pub fitted_order: Order,
    pub pass: bool,
    /// The measured side was empty at every radius: the origin is isolated.
    pub isolated: bool,
}

impl SEquivReport {
    /// Report for a comparison that holds by construction.
    pub fn trivial(direction: Direction, s: f64) -> Self {
        SEquivReport {
            direction,
            s,
            per_radius: Vec::new(),
            fitted_order: Order::Infinite,
            pass: true,
            isolated: false,
        }
    }
}

fn tree(cloud: &PointCloud) -> KdTree<f64, usize, &[f64]> {
    let dim = cloud.points.first().map_or(1, |p| p.len());
    let mut t = KdTree::with_capacity(dim, cloud.len().max(1));
    for (i, p) in cloud.points.iter().enumerate() {
        t.add(p.as_slice(), i).expect("finite sample coordinates");
    }
    t
}

fn nearest(t: &KdTree<f64, usize, &[f64]>, x: &[f64], k: usize) -> Vec<(f64, usize)> {
    t.nearest(x, k, &squared_euclidean)
        .map(|v| v.into_iter().map(|(d2, &i)| (d2.sqrt(), i)).collect())
        .unwrap_or_default()
}

/// `sup_{a in from} min_{b in to} ‖a - b‖`, by exact nearest-neighbour search.
pub fn delta(from: &PointCloud, to: &PointCloud) -> Result<f64, MetricError> {
    if from.is_empty() || to.is_empty() {
        return Err(MetricError::EmptyCloud);
    }
    let t = tree(to);
    Ok(from
        .points
        .iter()
        .map(|a| nearest(&t, a, 1)[0].0)
        .fold(0.0, f64::max))
}

const REFINE_NEIGHBOURS: usize = 3;
const REFINE_BATCH: usize = 32;

/// Directed delta from `from` to the slice `to ∩ S_r`, with each cloud
/// distance improved by local minimization over the target's pieces.
///
/// Every refined value is the distance to an actual feasible point of the
/// target, so it bounds the true distance from above and never
/// exceeds the cloud distance. Points are processed in decreasing order of
/// cloud distance and the scan stops once no remaining point can raise the
/// supremum.
pub fn refined_delta(
    from: &PointCloud,
    to: &Target,
    to_cloud: &PointCloud,
    cfg: &SamplerConfig,
) -> Result<f64, MetricError> {
    if from.is_empty() || to_cloud.is_empty() {
        return Err(MetricError::EmptyCloud);
    }
    let r = from.radius;
    let t = tree(to_cloud);
    let near: Vec<Vec<(f64, usize)>> = from
        .points
        .iter()
        .map(|a| nearest(&t, a, REFINE_NEIGHBOURS))
        .collect();
    let mut order: Vec<usize> = (0..from.len()).collect();
    order.sort_by(|&i, &j| near[j][0].0.total_cmp(&near[i][0].0).then(i.cmp(&j)));
    let refine = |i: usize| -> f64 {
        let a = &from.points[i];
        let mut best = near[i][0].0;
        for (pi, sys) in to.pieces.iter().enumerate() {
            if let Some(d) = refine_on_system(a, sys, a, Some(r), r, cfg, &NoFilter) {
                best = best.min(d);
            }
            for &(_, j) in &near[i] {
                if to_cloud.pieces[j] == pi {
                    let start = &to_cloud.points[j];
                    if let Some(d) = refine_on_system(a, sys, start, Some(r), r, cfg, &NoFilter) {
                        best = best.min(d);
                    }
                }
            }
        }
        best
    };
    let mut sup = 0.0f64;
    for batch in order.chunks(REFINE_BATCH) {
        if near[batch[0]][0].0 <= sup {
            break;
        }
        let vals: Vec<f64> = batch
            .par_iter()
            .filter(|&&i| near[i][0].0 > sup)
            .map(|&i| refine(i))
            .collect();
        sup = vals.into_iter().fold(sup, f64::max);
    }
    Ok(sup)
}

/// Least-squares slope of `ln δ` against `ln r` over pairs with
/// `δ > delta_floor`; `Order::Infinite` when every delta is at or below it.
pub fn fit_contact_order(pairs: &[(f64, f64)], delta_floor: f64) -> Result<Order, MetricError> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(_, d)| *d > delta_floor)
        .map(|(r, d)| (r.ln(), d.ln()))
        .collect();
    if pts.is_empty() && !pairs.is_empty() {
        return Ok(Order::Infinite);
    }
    if pts.len() < 2 {
        return Err(MetricError::InsufficientData(format!(
            "need at least 2 positive deltas, got {}",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(MetricError::InsufficientData(
            "radii are not distinct".into(),
        ));
    }
    Ok(Order::Finite(sxy / sxx))
}

/// Fitted order and verdict for a per-radius profile ordered by decreasing
/// radius. Deltas at or below `cfg.delta_floor` count as zero.
///
/// The verdict passes when every delta is zero, or when the fitted order is
/// at least `s + cfg.order_margin` and the ratios `δ/r^s` strictly decrease
/// (consecutive zeros allowed). A single positive delta at a radius other
/// than the smallest fits as `+∞`; at the smallest radius it is reported as
/// `ln δ / ln r` and fails the monotonicity test.
pub fn verdict(per_radius: &mut [RadiusDelta], s: f64, cfg: &SamplerConfig) -> (Order, bool) {
    for row in per_radius.iter_mut() {
        if row.delta <= cfg.delta_floor {
            row.delta = 0.0;
        }
        row.ratio = row.delta / row.radius.powf(s);
    }
    let positive: Vec<usize> = (0..per_radius.len())
        .filter(|&k| per_radius[k].delta > 0.0)
        .collect();
    let fitted = match positive.len() {
        0 => return (Order::Infinite, true),
        1 => {
            let k = positive[0];
            if k + 1 == per_radius.len() {
                Order::Finite(per_radius[k].delta.ln() / per_radius[k].radius.ln())
            } else {
                Order::Infinite
            }
        }
        _ => {
            let pairs: Vec<(f64, f64)> = per_radius.iter().map(|p| (p.radius, p.delta)).collect();
            fit_contact_order(&pairs, 0.0).expect("two positive deltas")
        }
    };
    let decreasing = per_radius
        .windows(2)
        .all(|w| w[1].ratio < w[0].ratio || (w[0].ratio == 0.0 && w[1].ratio == 0.0));
    (fitted, fitted.at_least(s + cfg.order_margin) && decreasing)
}

/// Sphere slices of two sets at the same radii.
#[derive(Debug, Clone)]
pub struct SlicePair {
    pub a: Vec<PointCloud>,
    pub b: Vec<PointCloud>,
}

/// Samples both sets at every radius of `cfg.radii`; empty slices are kept.
pub fn slice_pair(
    a: &Target,
    b: &Target,
    cfg: &SamplerConfig,
    filter: &dyn PointFilter,
) -> SlicePair {
    SlicePair {
        a: cfg
            .radii
            .iter()
            .map(|&r| sample_points(a, r, cfg, filter))
            .collect(),
        b: cfg
            .radii
            .iter()
            .map(|&r| sample_points(b, r, cfg, filter))
            .collect(),
    }
}

fn check_s(s: f64) -> Result<(), MetricError> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(MetricError::InvalidConfig(format!(
            "s = {s} must be a real >= 1"
        )));
    }
    Ok(())
}

/// `from ≤_s to` from pre-sampled slices (one cloud per radius, same order).
///
/// Distances are refined onto the whole target, so restricting the slices
/// to a filter restricts only the points measured from.
pub fn leq_from_slices(
    direction: Direction,
    from_slices: &[PointCloud],
    to: &Target,
    to_slices: &[PointCloud],
    s: f64,
    cfg: &SamplerConfig,
) -> Result<SEquivReport, MetricError> {
    check_s(s)?;
    if from_slices.iter().all(|c| c.is_empty()) {
        let per_radius = from_slices
            .iter()
            .map(|c| RadiusDelta {
                radius: c.radius,
                delta: 0.0,
                ratio: 0.0,
            })
            .collect();
        return Ok(SEquivReport {
            direction,
            s,
            per_radius,
            fitted_order: Order::Infinite,
            pass: true,
            isolated: true,
        });
    }
    let mut per_radius = Vec::with_capacity(from_slices.len());
    for (fc, tc) in from_slices.iter().zip(to_slices) {
        let delta = if fc.is_empty() {
            0.0
        } else if tc.is_empty() {
            return Err(MetricError::EmptyAtRadius { radius: tc.radius });
        } else {
            refined_delta(fc, to, tc, cfg)?
        };
        per_radius.push(RadiusDelta {
            radius: fc.radius,
            delta,
            ratio: 0.0,
        });
    }
    let (fitted_order, pass) = verdict(&mut per_radius, s, cfg);
    Ok(SEquivReport {
        direction,
        s,
        per_radius,
        fitted_order,
        pass,
        isolated: false,
    })
}

/// `A ≤_s B`: how far sampled points of A lie from B, radius by radius.
///
/// If A is empty at every radius the origin is isolated in A and the report
/// passes. Where A is nonempty but B is empty, `EmptyAtRadius` is returned.
pub fn check_leq_s_filtered(
    a: &Target,
    b: &Target,
    s: f64,
    cfg: &SamplerConfig,
    filter: &dyn PointFilter,
) -> Result<SEquivReport, MetricError> {
    cfg.validate()?;
    check_s(s)?;
    let slices = slice_pair(a, b, cfg, filter);
    leq_from_slices(Direction::ALeqB, &slices.a, b, &slices.b, s, cfg)
}

pub fn check_leq_s(
    a: &Target,
    b: &Target,
    s: f64,
    cfg: &SamplerConfig,
) -> Result<SEquivReport, MetricError> {
    check_leq_s_filtered(a, b, s, cfg, &NoFilter)
}

/// Both directions of the s-comparison, from one sampling pass.
pub fn check_equiv_filtered(
    a: &Target,
    b: &Target,
    s: f64,
    cfg: &SamplerConfig,
    filter: &dyn PointFilter,
) -> Result<(SEquivReport, SEquivReport), MetricError> {
    cfg.validate()?;
    check_s(s)?;
    let slices = slice_pair(a, b, cfg, filter);
    equiv_from_slices(a, &slices.a, b, &slices.b, s, cfg)
}

pub fn equiv_from_slices(
    a: &Target,
    a_slices: &[PointCloud],
    b: &Target,
    b_slices: &[PointCloud],
    s: f64,
    cfg: &SamplerConfig,
) -> Result<(SEquivReport, SEquivReport), MetricError> {
    let ab = leq_from_slices(Direction::ALeqB, a_slices, b, b_slices, s, cfg)?;
    let ba = leq_from_slices(Direction::BLeqA, b_slices, a, a_slices, s, cfg)?;
    Ok((ab, ba))
}

pub fn check_equiv(
    a: &Target,
    b: &Target,
    s: f64,
    cfg: &SamplerConfig,
) -> Result<(SEquivReport, SEquivReport), MetricError> {
    check_equiv_filtered(a, b, s, cfg, &NoFilter)
}

/// CSV delta profile with header `radius,delta_ab,delta_ba,ratio_ab,ratio_ba`
/// and floats printed with 17 significant digits.
pub fn profile_csv(ab: &SEquivReport, ba: &SEquivReport) -> String {
    let mut out = String::from("radius,delta_ab,delta_ba,ratio_ab,ratio_ba\n");
    for (x, y) in ab.per_radius.iter().zip(&ba.per_radius) {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            x.radius, x.delta, y.delta, x.ratio, y.ratio
        )
        .expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[&[f64]]) -> PointCloud {
        PointCloud::new(1.0, points.iter().map(|p| p.to_vec()).collect(), "c")
    }

    #[test]
    fn delta_examples() {
        let c = cloud(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(delta(&c, &c).unwrap(), 0.0);
        let o = cloud(&[&[0.0, 0.0]]);
        assert_eq!(delta(&c, &o).unwrap(), 1.0);
        assert_eq!(delta(&o, &c).unwrap(), 0.0);
        let d = delta(&cloud(&[&[0.0, 1.0]]), &cloud(&[&[1.0, 0.0]])).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(delta(&o, &cloud(&[])), Err(MetricError::EmptyCloud));
    }

    #[test]
    fn fit_examples() {
        let radii = [0.2, 0.1, 0.05, 0.025];
        let pairs: Vec<_> = radii.iter().map(|&r| (r, 3.0 * r * r)).collect();
        match fit_contact_order(&pairs, 1e-9).unwrap() {
            Order::Finite(v) => assert!((v - 2.0).abs() < 1e-12),
            Order::Infinite => panic!("finite data"),
        }
        let zeros: Vec<_> = radii.iter().map(|&r| (r, 0.0)).collect();
        assert_eq!(fit_contact_order(&zeros, 1e-9).unwrap(), Order::Infinite);
        assert!(matches!(
            fit_contact_order(&[(0.1, 1.0)], 1e-9),
            Err(MetricError::InsufficientData(_))
        ));
    }

    fn rows(deltas: &[f64]) -> Vec<RadiusDelta> {
        [0.2, 0.1, 0.05, 0.025]
            .iter()
            .zip(deltas)
            .map(|(&radius, &delta)| RadiusDelta {
                radius,
                delta,
                ratio: 0.0,
            })
            .collect()
    }

    #[test]
    fn verdict_rules() {
        let cfg = SamplerConfig::default();
        let quad: Vec<f64> = [0.2f64, 0.1, 0.05, 0.025].iter().map(|r| r * r).collect();
        assert!(verdict(&mut rows(&quad), 1.5, &cfg).1);
        assert!(!verdict(&mut rows(&quad), 2.0, &cfg).1);
        assert_eq!(
            verdict(&mut rows(&[0.0; 4]), 5.0, &cfg),
            (Order::Infinite, true)
        );
        assert_eq!(
            verdict(&mut rows(&[1e-3, 0.0, 0.0, 0.0]), 5.0, &cfg),
            (Order::Infinite, true)
        );
        assert!(!verdict(&mut rows(&[0.0, 0.0, 0.0, 1e-3]), 1.0, &cfg).1);
        // Steep fit but a non-monotone ratio.
        assert!(!verdict(&mut rows(&[1e-2, 1e-4, 2e-4, 1e-8]), 1.0, &cfg).1);
    }
}
