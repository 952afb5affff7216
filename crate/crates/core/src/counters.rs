use core::ops::{Add, AddAssign};

/// Bytes per stored scalar in the traffic model (half precision). The
/// arithmetic itself runs in `f64`; only traffic accounting uses this.
pub const SCALAR_BYTES: u64 = 2;

/// Instrumentation ledger charged by every partitioner and point operation.
///
/// Counters only ever grow during a run. Ledgers from independent blocks can
/// be merged with `+`/`+=`; merging is associative and commutative, so
/// per-block ledgers summed in any order equal the sequential total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CostCounters {
    /// Euclidean distance evaluations.
    pub distance_ops: u64,
    /// Point-coordinate fetches.
    pub point_reads: u64,
    /// Feature-vector fetches.
    pub feature_reads: u64,
    /// Whole-level partition passes.
    pub traversal_rounds: u64,
    /// Median-sort calls.
    pub sort_invocations: u64,
    /// Total elements passed to median sorts.
    pub sort_elements: u64,
    /// Parent-block loads issued by block-wise neighbor search/gather.
    pub parent_loads: u64,
    /// Parent-block loads avoided because a sibling already loaded it.
    pub parent_loads_saved: u64,
    /// Leaf-block loads.
    pub block_loads: u64,
    /// FPS candidates skipped by the sampled-point mask.
    pub skipped_candidates: u64,
}

impl CostCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Modelled traffic: `point_reads * 3 + feature_reads * c` scalars.
    pub fn bytes_read(&self, feature_width: usize) -> u64 {
        self.point_reads * 3 * SCALAR_BYTES + self.feature_reads * feature_width as u64 * SCALAR_BYTES
    }

    /// Field-wise `self >= earlier`; used to check monotonicity.
    pub fn dominates(&self, earlier: &CostCounters) -> bool {
        self.fields().iter().zip(earlier.fields()).all(|(a, b)| *a >= b)
    }

    /// Counter values in declaration order, paired with their names.
    pub fn named_fields(&self) -> [(&'static str, u64); 10] {
        let f = self.fields();
        [
            ("distance_ops", f[0]),
            ("point_reads", f[1]),
            ("feature_reads", f[2]),
            ("traversal_rounds", f[3]),
            ("sort_invocations", f[4]),
            ("sort_elements", f[5]),
            ("parent_loads", f[6]),
            ("parent_loads_saved", f[7]),
            ("block_loads", f[8]),
            ("skipped_candidates", f[9]),
        ]
    }

    fn fields(&self) -> [u64; 10] {
        [
            self.distance_ops,
            self.point_reads,
            self.feature_reads,
            self.traversal_rounds,
            self.sort_invocations,
            self.sort_elements,
            self.parent_loads,
            self.parent_loads_saved,
            self.block_loads,
            self.skipped_candidates,
        ]
    }
}

impl AddAssign for CostCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.distance_ops += rhs.distance_ops;
        self.point_reads += rhs.point_reads;
        self.feature_reads += rhs.feature_reads;
        self.traversal_rounds += rhs.traversal_rounds;
        self.sort_invocations += rhs.sort_invocations;
        self.sort_elements += rhs.sort_elements;
        self.parent_loads += rhs.parent_loads;
        self.parent_loads_saved += rhs.parent_loads_saved;
        self.block_loads += rhs.block_loads;
        self.skipped_candidates += rhs.skipped_candidates;
    }
}

impl Add for CostCounters {
    type Output = CostCounters;

    fn add(mut self, rhs: Self) -> CostCounters {
        self += rhs;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bytes_read_formula() {
        let c = CostCounters {
            point_reads: 10,
            feature_reads: 4,
            ..Default::default()
        };
        assert_eq!(c.bytes_read(8), 10 * 3 * 2 + 4 * 8 * 2);
        assert_eq!(c.bytes_read(0), 60);
    }

    #[test]
    fn merge_is_fieldwise_sum() {
        let a = CostCounters { distance_ops: 3, parent_loads: 1, ..Default::default() };
        let b = CostCounters { distance_ops: 4, block_loads: 2, ..Default::default() };
        let s = a + b;
        assert_eq!(s.distance_ops, 7);
        assert_eq!(s.parent_loads, 1);
        assert_eq!(s.block_loads, 2);
        assert!(s.dominates(&a) && s.dominates(&b));
        assert!(!a.dominates(&s));
    }
}
