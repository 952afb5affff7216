//! Sampling, neighbor search, interpolation and gathering, each in a global
//! (whole-cloud, oracle-grade) and a block-wise form.
//!
//! Block-wise variants run independently per leaf of a
//! [`Partition`](crate::partition::Partition) and report results in original
//! point indices, so they can be compared directly against the global forms.
//! Blocks are processed in depth-first order; running them in any other
//! order yields the same results and the same merged counters.

mod fps;
mod gather;
mod interpolate;
mod neighbors;

pub use fps::{allocate_quotas, block_fps, fps_window_check, global_fps, BlockSeed, SampleMode, SampleResult};
pub use gather::{block_gather, gather, BlockGather, GatherResult, GatheredRow};
pub use interpolate::{interpolate_features, DEFAULT_EPS, DEFAULT_K};
pub use neighbors::{
    block_ball_query, block_knn, global_ball_query, global_knn, BallOrder, BallQuery, Centers, NeighborResult,
    Neighborhood, Query,
};
