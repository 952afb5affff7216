//! JSON report documents (schema `fpo-report/1`).
//!
//! All counters are integers. Real-valued quantities are decimal strings
//! with nine significant digits so reports diff cleanly across runs.

use serde::{Deserialize, Serialize};

use fpo_core::metrics::QualityReport;
use fpo_core::partition::{Partition, PartitionStats};
use fpo_core::schedule::{ScheduleMode, ScheduleReport};
use fpo_core::CostCounters;

pub const SCHEMA: &str = "fpo-report/1";

/// Formats a real with nine significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.8e}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountersJson {
    pub distance_ops: u64,
    pub point_reads: u64,
    pub feature_reads: u64,
    pub traversal_rounds: u64,
    pub sort_invocations: u64,
    pub sort_elements: u64,
    pub parent_loads: u64,
    pub parent_loads_saved: u64,
    pub block_loads: u64,
    pub skipped_candidates: u64,
    pub bytes_read: u64,
}

impl CountersJson {
    pub fn new(c: &CostCounters, feature_width: usize) -> Self {
        CountersJson {
            distance_ops: c.distance_ops,
            point_reads: c.point_reads,
            feature_reads: c.feature_reads,
            traversal_rounds: c.traversal_rounds,
            sort_invocations: c.sort_invocations,
            sort_elements: c.sort_elements,
            parent_loads: c.parent_loads,
            parent_loads_saved: c.parent_loads_saved,
            block_loads: c.block_loads,
            skipped_candidates: c.skipped_candidates,
            bytes_read: c.bytes_read(feature_width),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsJson {
    pub num_blocks: usize,
    pub max_block: usize,
    pub min_nonempty_block: usize,
    pub coefficient_of_variation: String,
    pub levels: usize,
    pub degenerate_blocks: usize,
}

impl From<&PartitionStats> for StatsJson {
    fn from(s: &PartitionStats) -> Self {
        StatsJson {
            num_blocks: s.num_blocks,
            max_block: s.max_block,
            min_nonempty_block: s.min_nonempty_block,
            coefficient_of_variation: real(s.coefficient_of_variation),
            levels: s.levels,
            degenerate_blocks: s.degenerate_blocks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputJson {
    pub path: String,
    pub n: usize,
    pub c: usize,
}

/// Partitioner and its parameters; enough to rebuild the partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionParams {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub th: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitJson {
    pub dim: usize,
    pub value: String,
    pub retries: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeJson {
    pub id: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    pub range: [usize; 2],
    pub children: Vec<usize>,
    pub split: Option<SplitJson>,
    pub degenerate_stop: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockJson {
    pub id: usize,
    pub node: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    pub range: [usize; 2],
    pub degenerate_stop: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeJson {
    pub root: usize,
    pub nodes: Vec<NodeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionReport {
    pub schema: String,
    pub command: String,
    pub input: InputJson,
    pub params: PartitionParams,
    pub stats: StatsJson,
    pub counters: CountersJson,
    pub tree: TreeJson,
    pub blocks: Vec<BlockJson>,
    pub permutation: Vec<usize>,
}

impl PartitionReport {
    pub fn new(
        input: InputJson,
        params: PartitionParams,
        partition: &Partition,
        stats: &PartitionStats,
        counters: &CostCounters,
    ) -> Self {
        let nodes = partition
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, n)| NodeJson {
                id,
                depth: n.depth,
                parent: n.parent,
                range: [n.range.start, n.range.end],
                children: n.children.clone(),
                split: n.split.map(|s| SplitJson {
                    dim: s.dim,
                    value: real(s.value),
                    retries: s.retries,
                }),
                degenerate_stop: n.degenerate_stop,
            })
            .collect();
        let blocks = partition
            .blocks()
            .map(|b| BlockJson {
                id: b.id,
                node: b.node,
                depth: b.depth,
                parent: b.parent,
                range: [b.range.start, b.range.end],
                degenerate_stop: b.degenerate_stop,
            })
            .collect();
        let c = input.c;
        PartitionReport {
            schema: SCHEMA.into(),
            command: "partition".into(),
            input,
            params,
            stats: stats.into(),
            counters: CountersJson::new(counters, c),
            tree: TreeJson {
                root: partition.root(),
                nodes,
            },
            blocks,
            permutation: partition.layout().as_slice().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleJson {
    pub mode: String,
    pub units: usize,
    pub makespan: String,
    pub unit_busy: Vec<String>,
    pub utilization: String,
    pub loads_with_reuse: u64,
    pub loads_without_reuse: u64,
    pub reuse_factor: String,
    pub parent_loads: u64,
    pub parent_loads_saved: u64,
    pub loads_with_sibling_reuse: u64,
}

impl From<&ScheduleReport> for ScheduleJson {
    fn from(r: &ScheduleReport) -> Self {
        ScheduleJson {
            mode: match r.mode {
                ScheduleMode::Fps => "fps",
                ScheduleMode::Neighbor => "neighbor",
            }
            .into(),
            units: r.units,
            makespan: real(r.makespan),
            unit_busy: r.unit_busy.iter().map(|&b| real(b)).collect(),
            utilization: real(r.utilization),
            loads_with_reuse: r.loads_with_reuse,
            loads_without_reuse: r.loads_without_reuse,
            reuse_factor: real(r.reuse_factor),
            parent_loads: r.parent_loads,
            parent_loads_saved: r.parent_loads_saved,
            loads_with_sibling_reuse: r.loads_with_sibling_reuse,
        }
    }
}

pub const QUALITY_NOTE: &str =
    "geometric proxies (dispersion, coverage, neighbor recall) stand in for network accuracy";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityJson {
    pub fps_dispersion_ratio: String,
    pub coverage_radius_ratio: String,
    pub bq_recall: String,
    pub knn_recall: String,
    pub note: String,
}

impl From<&QualityReport> for QualityJson {
    fn from(q: &QualityReport) -> Self {
        QualityJson {
            fps_dispersion_ratio: real(q.fps_dispersion_ratio),
            coverage_radius_ratio: real(q.coverage_radius_ratio),
            bq_recall: real(q.bq_recall),
            knn_recall: real(q.knn_recall),
            note: QUALITY_NOTE.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::real;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(real(1.0), "1.00000000e0");
        assert_eq!(real(0.123456789123), "1.23456789e-1");
        assert_eq!(real(-2.5e10), "-2.50000000e10");
        assert_eq!(real(0.0), "0.00000000e0");
    }
}
