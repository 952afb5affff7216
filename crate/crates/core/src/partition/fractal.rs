use alloc::vec;
use alloc::vec::Vec;

use super::{Method, Node, Partition, Split};
use crate::error::{bail, Result};
use crate::geometry::midpoint;
use crate::{CostCounters, LayoutPermutation, PointCloud};

/// Min–max midpoint bisection with cycled axes.
///
/// A block with more than `th` points is split along axis
/// `(start_dim + depth) % 3` at `(min + max) / 2`; points with
/// `coord < mid` go left, the rest right. When that axis has zero extent the
/// next axes are tried; a block with no splittable axis becomes a leaf with
/// `degenerate_stop` set.
///
/// `traversal_rounds` is charged once per tree level that contains a split,
/// which is the pass count of a level-synchronous engine. Each attempted
/// split reads every point of its block once.
pub fn fractal_partition(
    cloud: &PointCloud,
    th: usize,
    start_dim: usize,
    counters: &mut CostCounters,
) -> Result<Partition> {
    if th == 0 {
        bail!(Domain, "threshold must be at least 1");
    }
    if start_dim > 2 {
        bail!(Domain, "start dimension must be 0, 1 or 2, got {start_dim}");
    }
    let n = cloud.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut scratch: Vec<usize> = Vec::with_capacity(n);
    let mut nodes = vec![Node {
        range: 0..n,
        depth: 0,
        parent: None,
        children: Vec::new(),
        split: None,
        degenerate_stop: false,
    }];
    let mut stack = vec![0usize];
    let mut split_levels = 0usize;

    while let Some(id) = stack.pop() {
        let range = nodes[id].range.clone();
        let depth = nodes[id].depth;
        if range.len() <= th {
            continue;
        }
        let block = &mut perm[range.clone()];
        let mut chosen = None;
        for retry in 0..3u8 {
            let dim = (start_dim + depth + retry as usize) % 3;
            counters.point_reads += block.len() as u64;
            let (lo, hi) = extrema(cloud, block, dim);
            let mid = midpoint(lo, hi);
            let left = block.iter().filter(|&&i| cloud.point(i)[dim] < mid).count();
            if left > 0 && left < block.len() {
                stable_partition(block, &mut scratch, |i| cloud.point(i)[dim] < mid);
                chosen = Some((Split { dim, value: mid, retries: retry }, left));
                break;
            }
        }
        let Some((split, left)) = chosen else {
            nodes[id].degenerate_stop = true;
            continue;
        };
        split_levels = split_levels.max(depth + 1);
        let mid_pos = range.start + left;
        let l = nodes.len();
        for child_range in [range.start..mid_pos, mid_pos..range.end] {
            nodes.push(Node {
                range: child_range,
                depth: depth + 1,
                parent: Some(id),
                children: Vec::new(),
                split: None,
                degenerate_stop: false,
            });
        }
        nodes[id].split = Some(split);
        nodes[id].children = vec![l, l + 1];
        // Right first so the left subtree is expanded first.
        stack.push(l + 1);
        stack.push(l);
    }

    counters.traversal_rounds += split_levels as u64;
    Ok(Partition::from_parts(
        Method::Fractal,
        nodes,
        0,
        LayoutPermutation::from_vec_unchecked(perm),
        th,
        start_dim,
    ))
}

pub(super) fn extrema(cloud: &PointCloud, block: &[usize], dim: usize) -> (f64, f64) {
    block.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
        let v = cloud.point(i)[dim];
        (lo.min(v), hi.max(v))
    })
}

/// Reorders `block` so that elements satisfying `goes_left` come first,
/// preserving relative order on both sides.
pub(super) fn stable_partition<F>(block: &mut [usize], scratch: &mut Vec<usize>, goes_left: F)
where
    F: Fn(usize) -> bool,
{
    scratch.clear();
    scratch.extend(block.iter().copied().filter(|&i| goes_left(i)));
    scratch.extend(block.iter().copied().filter(|&i| !goes_left(i)));
    block.copy_from_slice(scratch);
}
