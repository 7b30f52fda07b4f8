//! Horn neighbourhoods `H(A, σ) = {x : d(x, A) < ‖x‖^σ}`.

use kdtree::distance::squared_euclidean;
use kdtree::KdTree;

use super::sampler::refine_on_system;
use super::{dist, norm, sample_points, NoFilter, PointCloud, SamplerConfig, Target};

const HORN_NEIGHBOURS: usize = 3;

/// `d(x, cloud) < ‖x‖^sigma` with the distance taken to the nearest cloud
/// point. An empty cloud contains nothing, so the answer is `false`.
pub fn horn_member_cloud(x: &[f64], cloud: &PointCloud, sigma: f64) -> bool {
    let bound = norm(x).powf(sigma);
    cloud.points.iter().any(|p| dist(p, x) < bound)
}

/// `d(x, A) < ‖x‖^sigma`, with `d(x, A)` estimated from samples of
/// `A ∩ S_{‖x‖}` and free descent onto each piece of `A`.
///
/// Every candidate distance is realized by a feasible point of `A`, so the
/// estimate can only overstate `d(x, A)`. Returns `false` for `x = O` and
/// when no point of `A` is found near `‖x‖`.
pub fn horn_member(x: &[f64], a: &Target, sigma: f64, cfg: &SamplerConfig) -> bool {
    let r = norm(x);
    if r == 0.0 {
        return false;
    }
    let bound = r.powf(sigma);
    for sys in &a.pieces {
        if let Some(d) = refine_on_system(x, sys, x, None, r, cfg, &NoFilter) {
            if d < bound {
                return true;
            }
        }
    }
    let cloud = sample_points(a, r, cfg, &NoFilter);
    if cloud.is_empty() {
        return false;
    }
    let mut tree = KdTree::with_capacity(x.len(), cloud.len());
    for (i, p) in cloud.points.iter().enumerate() {
        tree.add(p.as_slice(), i)
            .expect("finite sample coordinates");
    }
    let near = tree
        .nearest(x, HORN_NEIGHBOURS, &squared_euclidean)
        .unwrap_or_default();
    for (d2, &i) in near {
        if d2.sqrt() < bound {
            return true;
        }
        let sys = &a.pieces[cloud.pieces[i]];
        if let Some(d) = refine_on_system(x, sys, &cloud.points[i], None, r, cfg, &NoFilter) {
            if d < bound {
                return true;
            }
        }
    }
    false
}
