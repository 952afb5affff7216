use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::geometry::distance;
use crate::partition::{NodeId, Partition, SearchSpaceKind};
use crate::pointops::SampleResult;
use crate::{CostCounters, PointCloud};

/// Ball-query candidate order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BallOrder {
    /// Keep the first `num` in-range candidates in ascending index order.
    #[default]
    FirstFound,
    /// Keep the `num` nearest in-range candidates (ties by index).
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallQuery {
    pub radius: f64,
    pub num: usize,
    pub order: BallOrder,
}

impl BallQuery {
    pub fn new(radius: f64, num: usize) -> Self {
        BallQuery {
            radius,
            num,
            order: BallOrder::FirstFound,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            bail!(Domain, "radius must be positive and finite, got {}", self.radius);
        }
        if self.num == 0 {
            bail!(Domain, "num must be at least 1");
        }
        Ok(())
    }
}

/// The query a [`NeighborResult`] answers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Query {
    Ball { radius: f64, num: usize },
    Knn { k: usize },
}

/// Neighbors of one center.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub center: usize,
    /// Block the center was searched from (block-wise results only).
    pub block: Option<usize>,
    pub found: Vec<usize>,
    /// Distances aligned with `found`.
    pub distances: Vec<f64>,
    pub search_space: SearchSpaceKind,
}

impl Neighborhood {
    pub fn count(&self) -> usize {
        self.found.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborResult {
    pub query: Query,
    pub entries: Vec<Neighborhood>,
}

impl NeighborResult {
    /// Center indices in result order.
    pub fn centers(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.center).collect()
    }
}

/// Which points act as query centers in a block-wise search.
#[derive(Debug, Clone, PartialEq)]
pub enum Centers {
    /// Every point of every block, in layout order.
    AllPoints,
    /// Explicit centers per block, indexed by block id.
    PerBlock(Vec<Vec<usize>>),
}

impl Centers {
    /// Groups sampled points by the block that holds them.
    pub fn from_samples(partition: &Partition, sample: &SampleResult) -> Centers {
        let owner = partition.block_of_points();
        let mut per_block = vec![Vec::new(); partition.num_blocks()];
        for &i in &sample.indices {
            per_block[owner[i]].push(i);
        }
        Centers::PerBlock(per_block)
    }

    fn for_block<'a>(&'a self, partition: &'a Partition, block: usize) -> &'a [usize] {
        match self {
            Centers::AllPoints => partition.block_indices(block),
            Centers::PerBlock(sets) => sets.get(block).map(Vec::as_slice).unwrap_or(&[]),
        }
    }

    fn validate(&self, partition: &Partition) -> Result<()> {
        if let Centers::PerBlock(sets) = self {
            if sets.len() != partition.num_blocks() {
                bail!(Domain, "{} center sets for {} blocks", sets.len(), partition.num_blocks());
            }
            let owner = partition.block_of_points();
            for (b, set) in sets.iter().enumerate() {
                for &c in set {
                    if c >= owner.len() || owner[c] != b {
                        bail!(Domain, "center {c} does not belong to block {b}");
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_indices(n: usize, centers: &[usize]) -> Result<()> {
    if let Some(&bad) = centers.iter().find(|&&c| c >= n) {
        bail!(Domain, "center index {bad} out of range for {n} points");
    }
    Ok(())
}

/// Scans `candidates` (ascending original indices) for one center.
fn ball_scan(
    cloud: &PointCloud,
    center: usize,
    candidates: &[usize],
    query: &BallQuery,
    counters: &mut CostCounters,
) -> (Vec<usize>, Vec<f64>) {
    let c = cloud.point(center);
    counters.distance_ops += candidates.len() as u64;
    match query.order {
        BallOrder::FirstFound => {
            let mut found = Vec::with_capacity(query.num);
            let mut dists = Vec::with_capacity(query.num);
            for &i in candidates {
                let d = distance(c, cloud.point(i));
                if d <= query.radius && found.len() < query.num {
                    found.push(i);
                    dists.push(d);
                }
            }
            (found, dists)
        }
        BallOrder::Nearest => {
            let mut hits: Vec<(f64, usize)> = candidates
                .iter()
                .map(|&i| (distance(c, cloud.point(i)), i))
                .filter(|&(d, _)| d <= query.radius)
                .collect();
            hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            hits.truncate(query.num);
            hits.into_iter().map(|(d, i)| (i, d)).unzip()
        }
    }
}

/// Exact K nearest of `candidates`, sorted by (distance, index).
fn knn_scan(
    cloud: &PointCloud,
    center: usize,
    candidates: &[usize],
    k: usize,
    counters: &mut CostCounters,
) -> (Vec<usize>, Vec<f64>) {
    let c = cloud.point(center);
    counters.distance_ops += candidates.len() as u64;
    let mut all: Vec<(f64, usize)> = candidates.iter().map(|&i| (distance(c, cloud.point(i)), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, cmp);
        all.truncate(k);
    }
    all.sort_unstable_by(cmp);
    all.into_iter().map(|(d, i)| (i, d)).unzip()
}

/// Ball query over the whole cloud. Every center reloads the full cloud.
pub fn global_ball_query(
    cloud: &PointCloud,
    centers: &[usize],
    query: &BallQuery,
    counters: &mut CostCounters,
) -> Result<NeighborResult> {
    query.validate()?;
    check_indices(cloud.len(), centers)?;
    let all: Vec<usize> = (0..cloud.len()).collect();
    let entries = centers
        .iter()
        .map(|&center| {
            counters.point_reads += all.len() as u64;
            let (found, distances) = ball_scan(cloud, center, &all, query, counters);
            Neighborhood {
                center,
                block: None,
                found,
                distances,
                search_space: SearchSpaceKind::WholeCloud,
            }
        })
        .collect();
    Ok(NeighborResult {
        query: Query::Ball {
            radius: query.radius,
            num: query.num,
        },
        entries,
    })
}

/// Exact K nearest neighbors over the whole cloud. With fewer than `k`
/// points every point is returned.
pub fn global_knn(cloud: &PointCloud, centers: &[usize], k: usize, counters: &mut CostCounters) -> Result<NeighborResult> {
    if k == 0 {
        bail!(Domain, "K must be at least 1");
    }
    check_indices(cloud.len(), centers)?;
    let all: Vec<usize> = (0..cloud.len()).collect();
    let entries = centers
        .iter()
        .map(|&center| {
            counters.point_reads += all.len() as u64;
            let (found, distances) = knn_scan(cloud, center, &all, k, counters);
            Neighborhood {
                center,
                block: None,
                found,
                distances,
                search_space: SearchSpaceKind::WholeCloud,
            }
        })
        .collect();
    Ok(NeighborResult {
        query: Query::Knn { k },
        entries,
    })
}

/// Tracks the parent block held on chip while walking leaves in order.
#[derive(Debug, Default)]
pub(crate) struct SpaceCache {
    parent: Option<NodeId>,
}

impl SpaceCache {
    /// Charges the load of block `b`'s search space. A parent already held
    /// for the previous sibling is reused instead of reloaded.
    pub(crate) fn charge(
        &mut self,
        partition: &Partition,
        b: usize,
        counters: &mut CostCounters,
        mut load: impl FnMut(&mut CostCounters, u64),
    ) {
        let space = partition.search_space(b).expect("block ids come from the partition");
        counters.block_loads += 1;
        match space.kind {
            SearchSpaceKind::LeafParent => {
                if self.parent == Some(space.node) {
                    counters.parent_loads_saved += 1;
                } else {
                    counters.parent_loads += 1;
                    load(counters, space.indices.len() as u64);
                    self.parent = Some(space.node);
                }
            }
            SearchSpaceKind::Leaf | SearchSpaceKind::WholeCloud => {
                load(counters, space.indices.len() as u64);
            }
        }
    }
}

fn block_search<F>(
    cloud: &PointCloud,
    partition: &Partition,
    centers: &Centers,
    counters: &mut CostCounters,
    mut scan: F,
) -> Result<Vec<Neighborhood>>
where
    F: FnMut(usize, &[usize], &mut CostCounters) -> (Vec<usize>, Vec<f64>),
{
    if partition.num_points() != cloud.len() {
        bail!(Domain, "partition covers {} points, cloud has {}", partition.num_points(), cloud.len());
    }
    centers.validate(partition)?;
    let mut cache = SpaceCache::default();
    let mut entries = Vec::new();
    for b in 0..partition.num_blocks() {
        let block_centers = centers.for_block(partition, b);
        if block_centers.is_empty() {
            continue;
        }
        cache.charge(partition, b, counters, |c, n| c.point_reads += n);
        let space = partition.search_space(b)?;
        let mut candidates = space.indices.to_vec();
        candidates.sort_unstable();
        for &center in block_centers {
            let (found, distances) = scan(center, &candidates, counters);
            entries.push(Neighborhood {
                center,
                block: Some(b),
                found,
                distances,
                search_space: space.kind,
            });
        }
    }
    Ok(entries)
}

/// Ball query per block, searching each block's leaf-or-parent space. The
/// space is loaded once per block and parents are shared by consecutive
/// siblings.
pub fn block_ball_query(
    cloud: &PointCloud,
    partition: &Partition,
    centers: &Centers,
    query: &BallQuery,
    counters: &mut CostCounters,
) -> Result<NeighborResult> {
    query.validate()?;
    let entries = block_search(cloud, partition, centers, counters, |center, cand, counters| {
        ball_scan(cloud, center, cand, query, counters)
    })?;
    Ok(NeighborResult {
        query: Query::Ball {
            radius: query.radius,
            num: query.num,
        },
        entries,
    })
}

/// K nearest neighbors per block within each block's search space.
pub fn block_knn(
    cloud: &PointCloud,
    partition: &Partition,
    centers: &Centers,
    k: usize,
    counters: &mut CostCounters,
) -> Result<NeighborResult> {
    if k == 0 {
        bail!(Domain, "K must be at least 1");
    }
    let entries = block_search(cloud, partition, centers, counters, |center, cand, counters| {
        knn_scan(cloud, center, cand, k, counters)
    })?;
    Ok(NeighborResult {
        query: Query::Knn { k },
        entries,
    })
}
