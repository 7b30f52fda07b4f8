//! Nearest-neighbour index over a point cloud with refinement onto the set.

use kdtree::distance::squared_euclidean;
use kdtree::KdTree;

use super::{norm, refine_on_system, PointCloud, PointFilter, SamplerConfig, Target};

/// Cloud points used as starting points for refinement.
const REFINE_NEIGHBOURS: usize = 3;

/// A point cloud together with a kd-tree over its points.
pub struct CloudIndex {
    pub cloud: PointCloud,
    tree: KdTree<f64, usize, Vec<f64>>,
}

impl CloudIndex {
    pub fn new(cloud: PointCloud) -> Self {
        let dim = cloud.points.first().map_or(1, |p| p.len());
        let mut tree = KdTree::with_capacity(dim, cloud.len().max(1));
        for (i, p) in cloud.points.iter().enumerate() {
            tree.add(p.clone(), i).expect("finite sample coordinates");
        }
        CloudIndex { cloud, tree }
    }

    /// Up to `k` nearest cloud points as `(distance, index)`, closest first.
    pub fn nearest(&self, x: &[f64], k: usize) -> Vec<(f64, usize)> {
        if self.cloud.is_empty() {
            return Vec::new();
        }
        self.tree
            .nearest(x, k, &squared_euclidean)
            .map(|v| v.into_iter().map(|(d2, &i)| (d2.sqrt(), i)).collect())
            .unwrap_or_default()
    }

    /// Upper bound on the unrestricted distance from `x` to `target`.
    ///
    /// Starts from the nearest cloud distance and improves it by nearest-point
    /// refinement onto each piece from `x` and from the nearest cloud points.
    /// `None` when the cloud is empty and no refinement lands on the set.
    pub fn free_distance(
        &self,
        x: &[f64],
        target: &Target,
        cfg: &SamplerConfig,
        filter: &dyn PointFilter,
    ) -> Option<f64> {
        let near = self.nearest(x, REFINE_NEIGHBOURS);
        let mut best = near.first().map(|&(d, _)| d);
        let scale = norm(x).max(self.cloud.radius);
        let mut improve = |d: Option<f64>| {
            if let Some(d) = d {
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        };
        for (pi, sys) in target.pieces.iter().enumerate() {
            improve(refine_on_system(x, sys, x, None, scale, cfg, filter));
            for &(_, j) in &near {
                if self.cloud.pieces[j] == pi {
                    let start = &self.cloud.points[j];
                    improve(refine_on_system(x, sys, start, None, scale, cfg, filter));
                }
            }
        }
        best
    }
}
