//! Deterministic synthetic point clouds.
//!
//! Every generator draws from a ChaCha8 stream seeded by [`SynthSpec::seed`],
//! so equal specs produce bit-identical clouds on every platform. Coordinates
//! and features are rounded to `f32` so that clouds survive a round trip
//! through the binary `f32` file format unchanged.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{bail, Result};
use crate::geometry::Aabb;
use crate::{Point, PointCloud};

/// Shape family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    /// Uniform in `[0, side]^3`.
    UniformCube { side: f64 },
    /// `clusters` isotropic Gaussians with centers uniform in the unit cube.
    GaussianClusters { clusters: usize, sigma: f64 },
    /// Uniform in the unit square of the xy-plane at height `z`.
    Planar { z: f64 },
    /// Two Gaussian clusters whose centers are `separation` apart along x.
    /// `separation` must be at least `10 * sigma`.
    TwoDenseRegions { sigma: f64, separation: f64 },
    /// Gaussian clusters with `fraction` of the points replaced by uniform
    /// points in the base bounding box inflated 10x about its center.
    WithOutliers {
        fraction: f64,
        clusters: usize,
        sigma: f64,
    },
}

impl SynthKind {
    pub const NAMES: [&'static str; 5] = [
        "uniform-cube",
        "gaussian-clusters",
        "planar",
        "two-dense-regions",
        "with-outliers",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SynthKind::UniformCube { .. } => "uniform-cube",
            SynthKind::GaussianClusters { .. } => "gaussian-clusters",
            SynthKind::Planar { .. } => "planar",
            SynthKind::TwoDenseRegions { .. } => "two-dense-regions",
            SynthKind::WithOutliers { .. } => "with-outliers",
        }
    }

    /// Default parameters for a kind name.
    pub fn from_name(name: &str) -> Option<SynthKind> {
        Some(match name {
            "uniform-cube" => SynthKind::UniformCube { side: 1.0 },
            "gaussian-clusters" => SynthKind::GaussianClusters { clusters: 8, sigma: 0.05 },
            "planar" => SynthKind::Planar { z: 0.5 },
            "two-dense-regions" => SynthKind::TwoDenseRegions { sigma: 0.05, separation: 1.0 },
            "with-outliers" => SynthKind::WithOutliers {
                fraction: 0.025,
                clusters: 8,
                sigma: 0.05,
            },
            _ => return None,
        })
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                bail!(Config, "{name} must be positive and finite, got {v}");
            }
            Ok(())
        };
        match *self {
            SynthKind::UniformCube { side } => positive("side", side),
            SynthKind::GaussianClusters { clusters, sigma } => {
                if clusters == 0 {
                    bail!(Config, "clusters must be at least 1");
                }
                positive("sigma", sigma)
            }
            SynthKind::Planar { z } => {
                if !z.is_finite() {
                    bail!(Config, "plane height must be finite");
                }
                Ok(())
            }
            SynthKind::TwoDenseRegions { sigma, separation } => {
                positive("sigma", sigma)?;
                positive("separation", separation)?;
                if separation < 10.0 * sigma {
                    bail!(Config, "separation {separation} is below 10 x sigma ({})", 10.0 * sigma);
                }
                Ok(())
            }
            SynthKind::WithOutliers {
                fraction,
                clusters,
                sigma,
            } => {
                if !(0.0..=1.0).contains(&fraction) {
                    bail!(Config, "outlier fraction must lie in [0, 1], got {fraction}");
                }
                SynthKind::GaussianClusters { clusters, sigma }.validate()
            }
        }
    }
}

/// A complete, reproducible generator request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n: usize,
    pub seed: u64,
    /// Width of the random per-point feature vectors (0 for none).
    pub feature_width: usize,
}

/// Generator output: the cloud plus the sorted indices of injected outliers.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub cloud: PointCloud,
    pub outliers: Vec<usize>,
}

/// Number of outliers injected for `fraction` of `n` points.
pub fn outlier_count(n: usize, fraction: f64) -> usize {
    let k = libm::round(fraction * n as f64) as usize;
    k.min(n)
}

pub fn generate(spec: &SynthSpec) -> Result<Synthetic> {
    if spec.n == 0 {
        bail!(Config, "n must be at least 1");
    }
    spec.kind.validate()?;
    let mut rng = Stream::new(spec.seed);
    let n = spec.n;
    let mut outliers = Vec::new();

    let coords: Vec<Point> = match spec.kind {
        SynthKind::UniformCube { side } => (0..n)
            .map(|_| [side * rng.unit(), side * rng.unit(), side * rng.unit()])
            .collect(),
        SynthKind::GaussianClusters { clusters, sigma } => clustered(&mut rng, n, clusters, sigma),
        SynthKind::Planar { z } => (0..n).map(|_| [rng.unit(), rng.unit(), z]).collect(),
        SynthKind::TwoDenseRegions { sigma, separation } => {
            let centers = [[0.0, 0.0, 0.0], [separation, 0.0, 0.0]];
            (0..n)
                .map(|i| {
                    let c = centers[i % 2];
                    [
                        c[0] + sigma * rng.normal(),
                        c[1] + sigma * rng.normal(),
                        c[2] + sigma * rng.normal(),
                    ]
                })
                .collect()
        }
        SynthKind::WithOutliers {
            fraction,
            clusters,
            sigma,
        } => {
            let mut coords = clustered(&mut rng, n, clusters, sigma);
            let bb = Aabb::from_points(&coords).expect("n >= 1");
            let center = bb.center();
            let extent = bb.extent();
            let k = outlier_count(n, fraction);
            // Partial Fisher-Yates: the first k entries become a uniform
            // sample of distinct indices.
            let mut order: Vec<usize> = (0..n).collect();
            for i in 0..k {
                let j = i + rng.below(n - i);
                order.swap(i, j);
            }
            outliers = order[..k].to_vec();
            outliers.sort_unstable();
            for &i in &outliers {
                let mut p = [0.0; 3];
                for d in 0..3 {
                    p[d] = center[d] + 10.0 * extent[d] * (rng.unit() - 0.5);
                }
                coords[i] = p;
            }
            coords
        }
    };

    let coords: Vec<Point> = coords
        .into_iter()
        .map(|p| [to_f32_grid(p[0]), to_f32_grid(p[1]), to_f32_grid(p[2])])
        .collect();
    let features: Vec<f64> = (0..n * spec.feature_width)
        .map(|_| to_f32_grid(2.0 * rng.unit() - 1.0))
        .collect();
    let cloud = PointCloud::with_features(coords, features, spec.feature_width)?;
    Ok(Synthetic { cloud, outliers })
}

fn clustered(rng: &mut Stream, n: usize, clusters: usize, sigma: f64) -> Vec<Point> {
    let centers: Vec<Point> = (0..clusters)
        .map(|_| [rng.unit(), rng.unit(), rng.unit()])
        .collect();
    (0..n)
        .map(|i| {
            let c = centers[i % clusters];
            [
                c[0] + sigma * rng.normal(),
                c[1] + sigma * rng.normal(),
                c[2] + sigma * rng.normal(),
            ]
        })
        .collect()
}

#[inline]
fn to_f32_grid(v: f64) -> f64 {
    v as f32 as f64
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64) -> Self {
        Stream(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` by multiply-shift.
    fn below(&mut self, bound: usize) -> usize {
        ((self.0.next_u64() as u128 * bound as u128) >> 64) as usize
    }

    /// Standard normal via Box-Muller (cosine branch only).
    fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }
}
