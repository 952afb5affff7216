use alloc::vec;
use alloc::vec::Vec;

use super::neighbors::SpaceCache;
use super::{NeighborResult, Neighborhood, Query};
use crate::error::{bail, Result};
use crate::partition::Partition;
use crate::{CostCounters, PointCloud};

/// Gathered features for one center: `slots * c` values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GatheredRow {
    pub center: usize,
    pub values: Vec<f64>,
    /// Set when slots were filled by padding.
    pub padded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatherResult {
    pub width: usize,
    pub rows: Vec<GatheredRow>,
}

impl GatherResult {
    /// Bit-level equality of every gathered value.
    pub fn bit_identical(&self, other: &GatherResult) -> bool {
        self.width == other.width
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.center == b.center
                    && a.padded == b.padded
                    && a.values.len() == b.values.len()
                    && a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

/// Block-wise gather output plus the leaf visit order of both units.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGather {
    pub result: GatherResult,
    /// Unit 0 walks blocks left to right, unit 1 right to left; they meet in
    /// the middle.
    pub schedule: [Vec<usize>; 2],
}

fn check_gather_input(neighbors: &NeighborResult, cloud: &PointCloud) -> Result<()> {
    if !cloud.has_features() {
        bail!(Domain, "gather needs per-point features");
    }
    let n = cloud.len();
    for e in &neighbors.entries {
        if e.center >= n {
            bail!(Domain, "center index {} out of range for {n} points", e.center);
        }
        if let Some(&bad) = e.found.iter().find(|&&i| i >= n) {
            bail!(Domain, "neighbor index {bad} out of range for {n} points");
        }
    }
    Ok(())
}

/// Copies the referenced features for one center. Ball-query rows are padded
/// to `num` slots by repeating the first neighbor, or with zeros when nothing
/// was found.
fn gather_row(e: &Neighborhood, query: &Query, cloud: &PointCloud) -> GatheredRow {
    let c = cloud.feature_width();
    let slots = match *query {
        Query::Ball { num, .. } => num.max(e.count()),
        Query::Knn { .. } => e.count(),
    };
    let mut values = Vec::with_capacity(slots * c);
    for &i in &e.found {
        values.extend_from_slice(cloud.feature(i));
    }
    let padded = e.count() < slots;
    if padded {
        match e.found.first() {
            Some(&first) => {
                for _ in e.count()..slots {
                    values.extend_from_slice(cloud.feature(first));
                }
            }
            None => values.resize(slots * c, 0.0),
        }
    }
    GatheredRow {
        center: e.center,
        values,
        padded,
    }
}

/// Global gather: one feature fetch per found neighbor, no reuse.
pub fn gather(neighbors: &NeighborResult, cloud: &PointCloud, counters: &mut CostCounters) -> Result<GatherResult> {
    check_gather_input(neighbors, cloud)?;
    let rows = neighbors
        .entries
        .iter()
        .map(|e| {
            counters.feature_reads += e.count() as u64;
            gather_row(e, &neighbors.query, cloud)
        })
        .collect();
    Ok(GatherResult {
        width: cloud.feature_width(),
        rows,
    })
}

/// Two-cursor visit order over `blocks` leaves.
pub(crate) fn two_cursor_schedule(blocks: usize) -> [Vec<usize>; 2] {
    let split = blocks.div_ceil(2);
    [(0..split).collect(), (split..blocks).rev().collect()]
}

/// Block-wise gather. Each center's neighbors must lie inside its block's
/// search space; features of that space are loaded once per block, with a
/// parent shared by consecutive siblings of the same unit. Values are
/// bit-identical to [`gather`].
pub fn block_gather(
    partition: &Partition,
    neighbors: &NeighborResult,
    cloud: &PointCloud,
    counters: &mut CostCounters,
) -> Result<BlockGather> {
    check_gather_input(neighbors, cloud)?;
    if partition.num_points() != cloud.len() {
        bail!(Domain, "partition covers {} points, cloud has {}", partition.num_points(), cloud.len());
    }
    let owner = partition.block_of_points();
    let position = partition.layout().inverse();
    let mut by_block: Vec<Vec<usize>> = vec![Vec::new(); partition.num_blocks()];
    for (row, e) in neighbors.entries.iter().enumerate() {
        let b = e.block.unwrap_or(owner[e.center]);
        if b >= partition.num_blocks() {
            bail!(Contract, "center {} names block {b}, which does not exist", e.center);
        }
        let space = partition.search_space(b)?;
        let range = partition.node(space.node).range.clone();
        if let Some(&bad) = e.found.iter().find(|&&i| !range.contains(&position[i])) {
            bail!(
                Contract,
                "neighbor {bad} of center {} lies outside the search space of block {b}",
                e.center
            );
        }
        by_block[b].push(row);
    }

    let schedule = two_cursor_schedule(partition.num_blocks());
    let mut rows: Vec<Option<GatheredRow>> = vec![None; neighbors.entries.len()];
    for unit in &schedule {
        let mut cache = SpaceCache::default();
        for &b in unit {
            if by_block[b].is_empty() {
                continue;
            }
            cache.charge(partition, b, counters, |c, n| c.feature_reads += n);
            for &row in &by_block[b] {
                rows[row] = Some(gather_row(&neighbors.entries[row], &neighbors.query, cloud));
            }
        }
    }
    Ok(BlockGather {
        result: GatherResult {
            width: cloud.feature_width(),
            rows: rows.into_iter().map(|r| r.expect("every row belongs to a block")).collect(),
        },
        schedule,
    })
}
