use alloc::vec;
use alloc::vec::Vec;

use super::{Method, Node, NodeId, Partition};
use crate::error::{bail, Result};
use crate::geometry::Aabb;
use crate::{CostCounters, LayoutPermutation, PointCloud};

const MAX_CELLS_PER_AXIS: usize = 1 << 20;

/// Interleaves the low 21 bits of each coordinate, x in the lowest position.
pub fn morton_encode(cell: [u32; 3]) -> u64 {
    let mut code = 0u64;
    for bit in 0..21 {
        for (axis, &c) in cell.iter().enumerate() {
            code |= (((c >> bit) & 1) as u64) << (3 * bit + axis);
        }
    }
    code
}

/// Even grid over the bounding box with `cells` divisions per axis.
///
/// Points are binned in a single pass and blocks are ordered by the Morton
/// code of their cell; empty cells produce no block. The grid is given a
/// hierarchy by repeatedly halving cell coordinates, so each cell's parent is
/// the enclosing 2x-coarser cell and the root covers the whole grid.
pub fn uniform_partition(
    cloud: &PointCloud,
    cells: [usize; 3],
    counters: &mut CostCounters,
) -> Result<Partition> {
    if let Some(&c) = cells.iter().find(|&&c| c == 0 || c > MAX_CELLS_PER_AXIS) {
        bail!(Domain, "cells per axis must lie in 1..={MAX_CELLS_PER_AXIS}, got {c}");
    }
    let n = cloud.len();
    let bb = Aabb::from_points(cloud.coords()).expect("clouds are non-empty");
    let extent = bb.extent();

    counters.point_reads += n as u64;
    counters.traversal_rounds += 1;
    let codes: Vec<u64> = cloud
        .coords()
        .iter()
        .map(|p| {
            let mut cell = [0u32; 3];
            for d in 0..3 {
                if extent[d] > 0.0 {
                    let t = (p[d] - bb.min[d]) / extent[d] * cells[d] as f64;
                    cell[d] = (t as usize).min(cells[d] - 1) as u32;
                }
            }
            morton_encode(cell)
        })
        .collect();

    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by_key(|&i| codes[i]);

    let levels = cells
        .iter()
        .map(|&c| c.next_power_of_two().trailing_zeros() as usize)
        .max()
        .unwrap_or(0);

    let mut nodes = vec![Node {
        range: 0..n,
        depth: 0,
        parent: None,
        children: Vec::new(),
        split: None,
        degenerate_stop: false,
    }];
    let mut frontier: Vec<NodeId> = vec![0];
    for depth in 1..=levels {
        let shift = 3 * (levels - depth);
        let mut next = Vec::new();
        for &id in &frontier {
            let range = nodes[id].range.clone();
            let mut start = range.start;
            while start < range.end {
                let key = codes[perm[start]] >> shift;
                let mut end = start + 1;
                while end < range.end && codes[perm[end]] >> shift == key {
                    end += 1;
                }
                let child = nodes.len();
                nodes.push(Node {
                    range: start..end,
                    depth,
                    parent: Some(id),
                    children: Vec::new(),
                    split: None,
                    degenerate_stop: false,
                });
                nodes[id].children.push(child);
                next.push(child);
                start = end;
            }
        }
        frontier = next;
    }

    Ok(Partition::from_parts(
        Method::Uniform,
        nodes,
        0,
        LayoutPermutation::from_vec_unchecked(perm),
        n,
        0,
    ))
}

/// Octree: any cell holding more than `th` points is split into 8 equal
/// sub-cells at its center, up to `max_depth`. Empty sub-cells are dropped
/// and children are ordered by Morton child code (x bit lowest). Cells still
/// above `th` at `max_depth` become leaves with `degenerate_stop` set.
pub fn octree_partition(
    cloud: &PointCloud,
    th: usize,
    max_depth: usize,
    counters: &mut CostCounters,
) -> Result<Partition> {
    if th == 0 {
        bail!(Domain, "threshold must be at least 1");
    }
    if max_depth == 0 {
        bail!(Domain, "max depth must be at least 1");
    }
    let n = cloud.len();
    let root_box = Aabb::from_points(cloud.coords()).expect("clouds are non-empty");
    let mut perm: Vec<usize> = (0..n).collect();
    let mut nodes = vec![Node {
        range: 0..n,
        depth: 0,
        parent: None,
        children: Vec::new(),
        split: None,
        degenerate_stop: false,
    }];
    let mut stack = vec![(0usize, root_box)];
    let mut split_levels = 0usize;

    while let Some((id, cell)) = stack.pop() {
        let range = nodes[id].range.clone();
        let depth = nodes[id].depth;
        if range.len() <= th {
            continue;
        }
        if depth >= max_depth {
            nodes[id].degenerate_stop = true;
            continue;
        }
        let center = cell.center();
        let child_code = |i: usize| {
            let p = cloud.point(i);
            (p[0] >= center[0]) as usize | ((p[1] >= center[1]) as usize) << 1 | ((p[2] >= center[2]) as usize) << 2
        };
        counters.point_reads += range.len() as u64;
        split_levels = split_levels.max(depth + 1);
        perm[range.clone()].sort_by_key(|&i| child_code(i));

        let mut children = Vec::new();
        let mut start = range.start;
        while start < range.end {
            let code = child_code(perm[start]);
            let mut end = start + 1;
            while end < range.end && child_code(perm[end]) == code {
                end += 1;
            }
            let mut sub = cell;
            for d in 0..3 {
                if code >> d & 1 == 1 {
                    sub.min[d] = center[d];
                } else {
                    sub.max[d] = center[d];
                }
            }
            let child = nodes.len();
            nodes.push(Node {
                range: start..end,
                depth: depth + 1,
                parent: Some(id),
                children: Vec::new(),
                split: None,
                degenerate_stop: false,
            });
            children.push((child, sub));
            start = end;
        }
        nodes[id].children = children.iter().map(|&(c, _)| c).collect();
        stack.extend(children.into_iter().rev());
    }

    counters.traversal_rounds += split_levels as u64;
    Ok(Partition::from_parts(
        Method::Octree,
        nodes,
        0,
        LayoutPermutation::from_vec_unchecked(perm),
        th,
        0,
    ))
}
