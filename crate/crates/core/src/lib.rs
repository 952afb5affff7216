//! Shape-aware point-cloud partitioning and block-parallel point operations.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides:
//!
//! * [`PointCloud`] and the deterministic [`synth`] generators,
//! * four partitioners in [`partition`]: the min–max midpoint bisection
//!   ("fractal"), a uniform grid, a median-split KD-tree and an octree,
//!   all producing a [`partition::Partition`] with a depth-first layout,
//! * global and block-wise sampling, neighbor search, interpolation and
//!   gathering in [`pointops`],
//! * an analytical multi-unit cost model in [`schedule`],
//! * quality proxies comparing block-wise results to global oracles in
//!   [`metrics`].
//!
//! Every operation charges its work to a [`CostCounters`] ledger so that
//! complexity claims can be checked as exact counts rather than timings.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod cloud;
mod counters;
mod error;

pub mod geometry;
pub mod metrics;
pub mod partition;
pub mod pointops;
pub mod schedule;
pub mod synth;

pub use cloud::{LayoutPermutation, PointCloud};
pub use counters::{CostCounters, SCALAR_BYTES};
pub use error::{Error, Result};

/// A point in 3D space.
pub type Point = [f64; 3];
