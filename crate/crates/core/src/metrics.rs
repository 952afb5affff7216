//! Geometric quality proxies comparing block-wise results with global
//! oracles. They stand in for network accuracy, which needs training and is
//! not modelled here.

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::geometry::distance;
use crate::pointops::NeighborResult;
use crate::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    /// Smallest distance between two samples.
    pub min_pairwise: f64,
    /// Largest distance from any cloud point to its nearest sample.
    pub coverage_radius: f64,
}

/// Exact brute-force dispersion of a sample. Needs at least two samples.
pub fn fps_dispersion(sample: &[usize], cloud: &PointCloud) -> Result<Dispersion> {
    if sample.len() < 2 {
        bail!(Domain, "dispersion needs at least two samples, got {}", sample.len());
    }
    if let Some(&bad) = sample.iter().find(|&&i| i >= cloud.len()) {
        bail!(Domain, "sample index {bad} out of range for {} points", cloud.len());
    }
    let mut min_pairwise = f64::INFINITY;
    for (a, &i) in sample.iter().enumerate() {
        for &j in &sample[a + 1..] {
            min_pairwise = min_pairwise.min(distance(cloud.point(i), cloud.point(j)));
        }
    }
    let coverage_radius = cloud
        .coords()
        .iter()
        .map(|p| {
            sample
                .iter()
                .map(|&s| distance(p, cloud.point(s)))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(Dispersion {
        min_pairwise,
        coverage_radius,
    })
}

/// Mean over centers of `|block ∩ oracle| / max(1, |oracle|)`. Both results
/// must list the same centers in the same order.
pub fn neighbor_recall(block: &NeighborResult, oracle: &NeighborResult) -> Result<f64> {
    if block.entries.len() != oracle.entries.len() {
        bail!(
            Domain,
            "{} block centers but {} oracle centers",
            block.entries.len(),
            oracle.entries.len()
        );
    }
    if block.entries.is_empty() {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for (b, o) in block.entries.iter().zip(&oracle.entries) {
        if b.center != o.center {
            bail!(Domain, "center mismatch: block {} vs oracle {}", b.center, o.center);
        }
        let mut truth: Vec<usize> = o.found.clone();
        truth.sort_unstable();
        let hits = b.found.iter().filter(|i| truth.binary_search(i).is_ok()).count();
        total += hits as f64 / o.found.len().max(1) as f64;
    }
    Ok(total / block.entries.len() as f64)
}

/// Block-vs-global quality summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    /// Block sample min pairwise distance over the global sample's.
    pub fps_dispersion_ratio: f64,
    /// Block sample coverage radius over the global sample's.
    pub coverage_radius_ratio: f64,
    pub bq_recall: f64,
    pub knn_recall: f64,
}

impl QualityReport {
    pub fn from_parts(block: Dispersion, global: Dispersion, bq_recall: f64, knn_recall: f64) -> Self {
        QualityReport {
            fps_dispersion_ratio: block.min_pairwise / global.min_pairwise,
            coverage_radius_ratio: block.coverage_radius / global.coverage_radius,
            bq_recall,
            knn_recall,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{fractal_partition, SearchSpaceKind};
    use crate::pointops::{block_knn, global_knn, Centers, Neighborhood, Query};
    use crate::CostCounters;
    use alloc::vec;

    fn unit_cube_corners() -> PointCloud {
        PointCloud::new((0..8).map(|i| [(i % 2) as f64, ((i / 2) % 2) as f64, (i / 4) as f64]).collect()).unwrap()
    }

    fn result(sets: &[(usize, &[usize])]) -> NeighborResult {
        NeighborResult {
            query: Query::Knn { k: 2 },
            entries: sets
                .iter()
                .map(|&(center, found)| Neighborhood {
                    center,
                    block: None,
                    found: found.to_vec(),
                    distances: vec![0.0; found.len()],
                    search_space: SearchSpaceKind::WholeCloud,
                })
                .collect(),
        }
    }

    #[test]
    fn antipodal_corners() {
        let c = unit_cube_corners();
        let d = fps_dispersion(&[0, 7], &c).unwrap();
        assert_eq!(d.min_pairwise, libm::sqrt(3.0));
        let all: Vec<usize> = (0..8).collect();
        assert_eq!(fps_dispersion(&all, &c).unwrap().coverage_radius, 0.0);
        assert!(fps_dispersion(&[3], &c).is_err());
    }

    #[test]
    fn dispersion_ignores_layout() {
        let c = unit_cube_corners();
        let perm = crate::LayoutPermutation::new(vec![7, 3, 5, 1, 6, 2, 4, 0]).unwrap();
        let shuffled = c.permuted(&perm);
        let inv = perm.inverse();
        let a = fps_dispersion(&[0, 3, 5], &c).unwrap();
        let b = fps_dispersion(&[inv[0], inv[3], inv[5]], &shuffled).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recall_extremes() {
        let a = result(&[(0, &[1, 2]), (1, &[0, 3])]);
        assert_eq!(neighbor_recall(&a, &a).unwrap(), 1.0);
        let b = result(&[(0, &[4, 5]), (1, &[6, 7])]);
        assert_eq!(neighbor_recall(&b, &a).unwrap(), 0.0);
        let half = result(&[(0, &[1, 9]), (1, &[0, 3])]);
        assert_eq!(neighbor_recall(&half, &a).unwrap(), 0.75);
        let other = result(&[(5, &[1, 2]), (1, &[0, 3])]);
        assert!(neighbor_recall(&other, &a).is_err());
        assert!(neighbor_recall(&result(&[(0, &[])]), &a).is_err());
        // Empty oracle sets count as 0 / 1.
        assert_eq!(neighbor_recall(&result(&[(0, &[])]), &result(&[(0, &[])])).unwrap(), 0.0);
    }

    #[test]
    fn single_block_recall_is_one() {
        let c = crate::synth::generate(&crate::synth::SynthSpec {
            kind: crate::synth::SynthKind::UniformCube { side: 1.0 },
            n: 300,
            seed: 2,
            feature_width: 0,
        })
        .unwrap()
        .cloud;
        let p = fractal_partition(&c, 300, 0, &mut CostCounters::new()).unwrap();
        let b = block_knn(&c, &p, &Centers::AllPoints, 3, &mut CostCounters::new()).unwrap();
        let g = global_knn(&c, &b.centers(), 3, &mut CostCounters::new()).unwrap();
        assert_eq!(neighbor_recall(&b, &g).unwrap(), 1.0);
    }
}
