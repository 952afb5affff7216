//! Analytical model of running point operations on `P` parallel units.
//!
//! Two workflows are modelled. Sampling uses inter-block parallelism: each
//! block's FPS is an independent job and jobs are placed by
//! longest-processing-time-first. Neighbor search uses intra-block
//! parallelism: blocks run one after another in depth-first order, a block's
//! search space is loaded once into a shared buffer, and its centers are
//! striped across the units.
//!
//! Costs are abstract time units; nothing here models pipelines, banks or
//! DRAM latency.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::partition::{Partition, SearchSpaceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    Fps,
    Neighbor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConfig {
    pub units: usize,
    /// Cost of one distance evaluation.
    pub distance_cost: f64,
    /// Cost of loading one point.
    pub load_cost: f64,
}

impl ScheduleConfig {
    pub fn new(units: usize) -> Self {
        ScheduleConfig {
            units,
            distance_cost: 1.0,
            load_cost: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.units == 0 {
            bail!(Domain, "at least one processing unit is required");
        }
        for (name, v) in [("distance cost", self.distance_cost), ("load cost", self.load_cost)] {
            if !(v.is_finite() && v >= 0.0) {
                bail!(Domain, "{name} must be finite and non-negative, got {v}");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub mode: ScheduleMode,
    pub units: usize,
    pub makespan: f64,
    pub unit_busy: Vec<f64>,
    /// `sum(unit_busy) / (units * makespan)`; 1 for an empty schedule.
    pub utilization: f64,
    /// Point loads when each block's search space is loaded once.
    pub loads_with_reuse: u64,
    /// Point loads when every center reloads its search space.
    pub loads_without_reuse: u64,
    /// `loads_without_reuse / loads_with_reuse`.
    pub reuse_factor: f64,
    pub parent_loads: u64,
    pub parent_loads_saved: u64,
    /// Point loads actually issued once siblings also share their parent.
    pub loads_with_sibling_reuse: u64,
}

/// Longest-processing-time-first placement of `costs` on `units` machines.
/// Jobs are taken by decreasing cost (ties by index) and each goes to the
/// least-loaded unit (ties by unit index). Returns per-unit busy time.
pub fn lpt(costs: &[f64], units: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]).then(a.cmp(&b)));
    let mut busy: Vec<f64> = vec![0.0; units];
    for j in order {
        let u = (0..units)
            .min_by(|&a, &b| busy[a].total_cmp(&busy[b]).then(a.cmp(&b)))
            .expect("units >= 1");
        busy[u] += costs[j];
    }
    busy
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Cost of masked FPS drawing `quota` samples from `size` points, plus
/// loading the block: `sum_{i<quota} (size - i)` distances and `size` loads.
pub fn fps_block_cost(size: usize, quota: usize, config: &ScheduleConfig) -> f64 {
    let q = quota.min(size) as u64;
    let s = size as u64;
    let distances = q * s - q * q.saturating_sub(1) / 2;
    distances as f64 * config.distance_cost + size as f64 * config.load_cost
}

fn utilization(busy: &[f64], makespan: f64) -> f64 {
    if makespan > 0.0 {
        busy.iter().sum::<f64>() / (busy.len() as f64 * makespan)
    } else {
        1.0
    }
}

/// Schedules arbitrary independent job costs. The makespan is the best LPT
/// schedule using at most `units` units, which makes it non-increasing in
/// `units` by construction.
pub fn schedule_jobs(costs: &[f64], units: usize) -> (f64, Vec<f64>) {
    let mut best = lpt(costs, units);
    let mut best_makespan = max_of(&best);
    for p in 1..units {
        let mut busy = lpt(costs, p);
        let makespan = max_of(&busy);
        if makespan < best_makespan {
            busy.resize(units, 0.0);
            best = busy;
            best_makespan = makespan;
        }
    }
    (best_makespan, best)
}

/// Inter-block FPS: one job per block with its masked-FPS cost.
pub fn schedule_fps(sizes: &[usize], quotas: &[usize], config: &ScheduleConfig) -> Result<ScheduleReport> {
    config.validate()?;
    if sizes.len() != quotas.len() {
        bail!(Domain, "{} block sizes but {} quotas", sizes.len(), quotas.len());
    }
    if let Some(b) = (0..sizes.len()).find(|&b| quotas[b] > sizes[b]) {
        bail!(Domain, "block {b} quota {} exceeds its size {}", quotas[b], sizes[b]);
    }
    let costs: Vec<f64> = sizes
        .iter()
        .zip(quotas)
        .map(|(&s, &q)| fps_block_cost(s, q, config))
        .collect();
    let (makespan, unit_busy) = schedule_jobs(&costs, config.units);
    let loads: u64 = sizes.iter().map(|&s| s as u64).sum();
    Ok(ScheduleReport {
        mode: ScheduleMode::Fps,
        units: config.units,
        makespan,
        utilization: utilization(&unit_busy, makespan),
        unit_busy,
        loads_with_reuse: loads,
        loads_without_reuse: loads,
        reuse_factor: 1.0,
        parent_loads: 0,
        parent_loads_saved: 0,
        loads_with_sibling_reuse: loads,
    })
}

/// Intra-block neighbor search. `centers[b]` is the number of centers in
/// block `b`. Each block costs one search-space load (skipped when a sibling
/// already holds the shared parent) plus the slowest unit's share of
/// `centers * space` distance evaluations.
pub fn schedule_neighbor(partition: &Partition, centers: &[usize], config: &ScheduleConfig) -> Result<ScheduleReport> {
    config.validate()?;
    if centers.len() != partition.num_blocks() {
        bail!(Domain, "{} center counts for {} blocks", centers.len(), partition.num_blocks());
    }
    let p = config.units;
    let mut unit_busy = vec![0.0; p];
    let mut makespan = 0.0;
    let mut with_reuse = 0u64;
    let mut without_reuse = 0u64;
    let mut sibling_loads = 0u64;
    let mut parent_loads = 0u64;
    let mut parent_saved = 0u64;
    let mut cached_parent = None;

    for (b, &k) in centers.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let space = partition.search_space(b)?;
        let s = space.indices.len() as u64;
        with_reuse += s;
        without_reuse += k as u64 * s;

        let mut loaded = s;
        if space.kind == SearchSpaceKind::LeafParent {
            if cached_parent == Some(space.node) {
                parent_saved += 1;
                loaded = 0;
            } else {
                parent_loads += 1;
                cached_parent = Some(space.node);
            }
        }
        sibling_loads += loaded;

        let load = loaded as f64 * config.load_cost;
        let per_center = s as f64 * config.distance_cost;
        let mut slowest = 0.0f64;
        for (u, busy) in unit_busy.iter_mut().enumerate() {
            // Striping: unit u takes centers u, u + p, u + 2p, ...
            let share = if u < k { (k - u).div_ceil(p) } else { 0 };
            let compute = share as f64 * per_center;
            *busy += load + compute;
            slowest = slowest.max(compute);
        }
        makespan += load + slowest;
    }

    let reuse_factor = if with_reuse > 0 {
        without_reuse as f64 / with_reuse as f64
    } else {
        1.0
    };
    Ok(ScheduleReport {
        mode: ScheduleMode::Neighbor,
        units: p,
        makespan,
        utilization: utilization(&unit_busy, makespan),
        unit_busy,
        loads_with_reuse: with_reuse,
        loads_without_reuse: without_reuse,
        reuse_factor,
        parent_loads,
        parent_loads_saved: parent_saved,
        loads_with_sibling_reuse: sibling_loads,
    })
}
