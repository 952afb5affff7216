use super::Partition;
use crate::CostCounters;

/// Block-size summary of a partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionStats {
    pub num_blocks: usize,
    pub max_block: usize,
    pub min_nonempty_block: usize,
    /// Population standard deviation of block sizes over their mean.
    pub coefficient_of_variation: f64,
    /// Tree levels containing at least one split (the traversal count for
    /// fractal partitions).
    pub levels: usize,
    pub degenerate_blocks: usize,
    pub counters: CostCounters,
}

impl PartitionStats {
    pub fn from_block_sizes(sizes: &[usize], levels: usize, counters: CostCounters) -> Self {
        let num_blocks = sizes.len();
        let max_block = sizes.iter().copied().max().unwrap_or(0);
        let min_nonempty_block = sizes.iter().copied().filter(|&s| s > 0).min().unwrap_or(0);
        let coefficient_of_variation = if num_blocks == 0 {
            0.0
        } else {
            let mean = sizes.iter().sum::<usize>() as f64 / num_blocks as f64;
            let var = sizes
                .iter()
                .map(|&s| {
                    let d = s as f64 - mean;
                    d * d
                })
                .sum::<f64>()
                / num_blocks as f64;
            if mean > 0.0 {
                libm::sqrt(var) / mean
            } else {
                0.0
            }
        };
        PartitionStats {
            num_blocks,
            max_block,
            min_nonempty_block,
            coefficient_of_variation,
            levels,
            degenerate_blocks: 0,
            counters,
        }
    }
}

pub fn partition_stats(partition: &Partition, counters: &CostCounters) -> PartitionStats {
    let mut stats = PartitionStats::from_block_sizes(&partition.block_sizes(), partition.split_levels(), *counters);
    stats.degenerate_blocks = partition.blocks().filter(|b| b.degenerate_stop).count();
    stats
}
