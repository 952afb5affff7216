use alloc::vec;
use alloc::vec::Vec;

use super::{Method, Node, Partition, Split};
use crate::error::{bail, Result};
use crate::{CostCounters, LayoutPermutation, PointCloud};

/// Median-split KD-tree with cycled axes.
///
/// Each block larger than `bs` is sorted along axis `(start_dim + depth) % 3`
/// (ties by original index) and split after position `ceil(k / 2)`, so the
/// median element `ceil(k / 2) - 1` and everything before it goes left. Every
/// split is one sequential sort: `sort_invocations += 1` and
/// `sort_elements += k`.
///
/// Splitting by sort position always leaves both halves non-empty, so the
/// recursion terminates on duplicate points without a degenerate stop.
pub fn kdtree_partition(
    cloud: &PointCloud,
    bs: usize,
    start_dim: usize,
    counters: &mut CostCounters,
) -> Result<Partition> {
    if bs == 0 {
        bail!(Domain, "block size must be at least 1");
    }
    if start_dim > 2 {
        bail!(Domain, "start dimension must be 0, 1 or 2, got {start_dim}");
    }
    let n = cloud.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut nodes = vec![Node {
        range: 0..n,
        depth: 0,
        parent: None,
        children: Vec::new(),
        split: None,
        degenerate_stop: false,
    }];
    let mut stack = vec![0usize];

    while let Some(id) = stack.pop() {
        let range = nodes[id].range.clone();
        let depth = nodes[id].depth;
        let k = range.len();
        if k <= bs {
            continue;
        }
        let dim = (start_dim + depth) % 3;
        let block = &mut perm[range.clone()];
        block.sort_unstable_by(|&a, &b| {
            cloud.point(a)[dim]
                .total_cmp(&cloud.point(b)[dim])
                .then(a.cmp(&b))
        });
        counters.sort_invocations += 1;
        counters.sort_elements += k as u64;
        counters.point_reads += k as u64;

        let left = k.div_ceil(2);
        let median = cloud.point(block[left - 1])[dim];
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
        nodes[id].split = Some(Split { dim, value: median, retries: 0 });
        nodes[id].children = vec![l, l + 1];
        stack.push(l + 1);
        stack.push(l);
    }

    Ok(Partition::from_parts(
        Method::KdTree,
        nodes,
        0,
        LayoutPermutation::from_vec_unchecked(perm),
        bs,
        start_dim,
    ))
}
