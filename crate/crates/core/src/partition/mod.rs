//! Partition trees and their depth-first block layout.
//!
//! All four partitioners produce the same [`Partition`] shape: a rooted tree
//! whose every node owns a contiguous range of the [`LayoutPermutation`].
//! Children partition their parent's range in order, so an in-order walk of
//! the leaves visits consecutive ranges and siblings are adjacent in memory.
//! Grid-based methods get a synthesized hierarchy (each cell's parent is the
//! enclosing 2x-coarser cell) so block-wise operations run over any method.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{bail, Result};
use crate::LayoutPermutation;

mod fractal;
mod grid;
mod kdtree;
mod stats;

pub use fractal::fractal_partition;
pub use grid::{octree_partition, uniform_partition};
pub use kdtree::kdtree_partition;
pub use stats::{partition_stats, PartitionStats};

pub type NodeId = usize;

/// Which partitioner built a [`Partition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Fractal,
    Uniform,
    KdTree,
    Octree,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Fractal, Method::Uniform, Method::KdTree, Method::Octree];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fractal => "fractal",
            Method::Uniform => "uniform",
            Method::KdTree => "kdtree",
            Method::Octree => "octree",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// Axis-aligned split of a binary node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub dim: usize,
    /// Midpoint (fractal) or median coordinate (kdtree).
    pub value: f64,
    /// Number of degenerate axes skipped before `dim` was found splittable.
    pub retries: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Positions in the layout owned by this subtree.
    pub range: Range<usize>,
    pub depth: usize,
    pub parent: Option<NodeId>,
    /// Children in layout order; empty for leaves.
    pub children: Vec<NodeId>,
    pub split: Option<Split>,
    /// Leaf that exceeds the size limit because no further split was possible.
    pub degenerate_stop: bool,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }
}

/// One leaf block as seen by block-wise operations.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockView {
    /// Position of the block in depth-first order.
    pub id: usize,
    pub node: NodeId,
    pub depth: usize,
    pub parent: Option<NodeId>,
    pub range: Range<usize>,
    pub degenerate_stop: bool,
}

/// Where a block's neighbor-search candidates come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchSpaceKind {
    WholeCloud,
    Leaf,
    LeafParent,
}

impl SearchSpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SearchSpaceKind::WholeCloud => "whole-cloud",
            SearchSpaceKind::Leaf => "leaf",
            SearchSpaceKind::LeafParent => "leaf+parent",
        }
    }
}

/// Candidate set of one block: the subtree of `node`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace<'a> {
    pub kind: SearchSpaceKind,
    pub node: NodeId,
    /// Original point indices, in layout order.
    pub indices: &'a [usize],
}

/// A partition tree plus the depth-first layout of its leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    method: Method,
    nodes: Vec<Node>,
    root: NodeId,
    leaves: Vec<NodeId>,
    layout: LayoutPermutation,
    limit: usize,
    start_dim: usize,
}

impl Partition {
    /// Assembles a partition from nodes whose ranges index `layout`.
    /// Leaves are collected in layout order.
    pub(crate) fn from_parts(
        method: Method,
        nodes: Vec<Node>,
        root: NodeId,
        layout: LayoutPermutation,
        limit: usize,
        start_dim: usize,
    ) -> Self {
        let mut leaves: Vec<NodeId> = (0..nodes.len()).filter(|&i| nodes[i].is_leaf()).collect();
        leaves.sort_by_key(|&i| nodes[i].range.start);
        Partition {
            method,
            nodes,
            root,
            leaves,
            layout,
            limit,
            start_dim,
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn layout(&self) -> &LayoutPermutation {
        &self.layout
    }

    /// The size limit the tree was built with (`th`, `bs`, or `n` for grids).
    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn start_dim(&self) -> usize {
        self.start_dim
    }

    pub fn num_blocks(&self) -> usize {
        self.leaves.len()
    }

    pub fn num_points(&self) -> usize {
        self.layout.len()
    }

    pub fn block(&self, id: usize) -> BlockView {
        let node_id = self.leaves[id];
        let node = &self.nodes[node_id];
        BlockView {
            id,
            node: node_id,
            depth: node.depth,
            parent: node.parent,
            range: node.range.clone(),
            degenerate_stop: node.degenerate_stop,
        }
    }

    /// Leaf blocks in depth-first (layout) order.
    pub fn blocks(&self) -> impl ExactSizeIterator<Item = BlockView> + '_ {
        (0..self.leaves.len()).map(move |id| self.block(id))
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.leaves.iter().map(|&i| self.nodes[i].len()).collect()
    }

    /// Original indices stored in a node's range.
    pub fn node_indices(&self, id: NodeId) -> &[usize] {
        &self.layout[self.nodes[id].range.clone()]
    }

    /// Original indices stored in block `id`.
    pub fn block_indices(&self, id: usize) -> &[usize] {
        self.node_indices(self.leaves[id])
    }

    /// Maps each original point index to the block holding it.
    pub fn block_of_points(&self) -> Vec<usize> {
        let mut owner = alloc::vec![0; self.num_points()];
        for id in 0..self.leaves.len() {
            for &i in self.block_indices(id) {
                owner[i] = id;
            }
        }
        owner
    }

    /// Candidate set for neighbor search from block `id`: the block itself at
    /// depth 0 or 1, otherwise everything under its immediate parent.
    pub fn search_space(&self, id: usize) -> Result<SearchSpace<'_>> {
        if id >= self.leaves.len() {
            bail!(Domain, "block {id} does not exist ({} blocks)", self.leaves.len());
        }
        let leaf = self.leaves[id];
        let node = &self.nodes[leaf];
        let (kind, space) = match (node.depth, node.parent) {
            (0, _) | (_, None) => (SearchSpaceKind::WholeCloud, leaf),
            (1, _) => (SearchSpaceKind::Leaf, leaf),
            (_, Some(parent)) => (SearchSpaceKind::LeafParent, parent),
        };
        Ok(SearchSpace {
            kind,
            node: space,
            indices: self.node_indices(space),
        })
    }

    /// Number of tree levels that contain at least one internal node.
    pub fn split_levels(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| !n.is_leaf())
            .map(|n| n.depth + 1)
            .max()
            .unwrap_or(0)
    }
}
