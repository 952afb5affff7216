use alloc::vec::Vec;

use super::NeighborResult;
use crate::error::{bail, Result};
use crate::PointCloud;

pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_K: usize = 3;

/// Inverse-distance blend of neighbor features: `w_i = 1 / (d_i + eps)`,
/// normalized to sum to one. Returns one feature vector per center.
pub fn interpolate_features(neighbors: &NeighborResult, cloud: &PointCloud, eps: f64) -> Result<Vec<Vec<f64>>> {
    if !cloud.has_features() {
        bail!(Domain, "interpolation needs per-point features");
    }
    if !(eps.is_finite() && eps > 0.0) {
        bail!(Domain, "eps must be positive and finite, got {eps}");
    }
    let c = cloud.feature_width();
    neighbors
        .entries
        .iter()
        .map(|e| {
            if e.found.is_empty() {
                bail!(Domain, "center {} has no neighbors to interpolate from", e.center);
            }
            let weights: Vec<f64> = e.distances.iter().map(|&d| 1.0 / (d + eps)).collect();
            let total: f64 = weights.iter().sum();
            let mut out = alloc::vec![0.0; c];
            for (&i, &w) in e.found.iter().zip(&weights) {
                let w = w / total;
                for (o, &f) in out.iter_mut().zip(cloud.feature(i)) {
                    *o += w * f;
                }
            }
            Ok(out)
        })
        .collect()
}
