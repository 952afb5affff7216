use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::geometry::distance_squared;
use crate::partition::Partition;
use crate::{CostCounters, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Global,
    Block,
}

/// Ordered farthest-point samples in original indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub indices: Vec<usize>,
    /// Per-block quotas in depth-first block order (block mode only).
    pub per_block_counts: Option<Vec<usize>>,
    pub mode: SampleMode,
}

/// Seed choice for each block in [`block_fps`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockSeed {
    /// The first point of the block in layout order.
    #[default]
    First,
    /// The block member with the lowest original index.
    LowestIndex,
}

/// Farthest point sampling scanning every point on every iteration.
///
/// Iteration `i` folds the distance to the `i`-th sample into a running
/// min-distance array over all `n` points and picks the unsampled point with
/// the largest min-distance (ties: lowest original index). Charges `n`
/// distance evaluations per iteration.
pub fn global_fps(cloud: &PointCloud, m: usize, seed_index: usize, counters: &mut CostCounters) -> Result<SampleResult> {
    let all: Vec<usize> = (0..cloud.len()).collect();
    check_request(cloud.len(), m, seed_index)?;
    let indices = fps_over(cloud, &all, m, seed_index, false, counters);
    Ok(SampleResult {
        indices,
        per_block_counts: None,
        mode: SampleMode::Global,
    })
}

/// Farthest point sampling with a sampled-point mask.
///
/// Produces exactly the output of [`global_fps`]. Already-sampled points are
/// skipped by walking the set bits of a validity mask (lowest-one first), so
/// iteration `i` evaluates `n - i` distances and skips `i` candidates.
pub fn fps_window_check(
    cloud: &PointCloud,
    m: usize,
    seed_index: usize,
    counters: &mut CostCounters,
) -> Result<SampleResult> {
    let all: Vec<usize> = (0..cloud.len()).collect();
    check_request(cloud.len(), m, seed_index)?;
    let indices = fps_over(cloud, &all, m, seed_index, true, counters);
    Ok(SampleResult {
        indices,
        per_block_counts: None,
        mode: SampleMode::Global,
    })
}

fn check_request(n: usize, m: usize, seed_index: usize) -> Result<()> {
    if m == 0 || m > n {
        bail!(Domain, "sample count must lie in 1..={n}, got {m}");
    }
    if seed_index >= n {
        bail!(Domain, "seed index {seed_index} out of range for {n} points");
    }
    Ok(())
}

/// FPS restricted to `candidates` (original indices). `seed` is an original
/// index contained in `candidates`.
pub(crate) fn fps_over(
    cloud: &PointCloud,
    candidates: &[usize],
    m: usize,
    seed: usize,
    window: bool,
    counters: &mut CostCounters,
) -> Vec<usize> {
    let k = candidates.len();
    debug_assert!(m <= k);
    let mut min_dist = vec![f64::INFINITY; k];
    // Bit set: 1 = not yet sampled.
    let mut valid = vec![u64::MAX; k.div_ceil(64)];
    if !k.is_multiple_of(64) {
        *valid.last_mut().unwrap() = (1u64 << (k % 64)) - 1;
    }
    let mut current = candidates.iter().position(|&i| i == seed).expect("seed must be a candidate");
    let mut out = Vec::with_capacity(m);

    for i in 0..m {
        out.push(candidates[current]);
        let c = *cloud.point(candidates[current]);
        let mut best: Option<(f64, usize, usize)> = None;
        let mut visit = |pos: usize, unsampled: bool| {
            let d = distance_squared(cloud.point(candidates[pos]), &c);
            if d < min_dist[pos] {
                min_dist[pos] = d;
            }
            if unsampled && pos != current {
                let key = (min_dist[pos], candidates[pos]);
                let better = match best {
                    None => true,
                    Some((bd, bi, _)) => key.0 > bd || (key.0 == bd && key.1 < bi),
                };
                if better {
                    best = Some((key.0, key.1, pos));
                }
            }
        };
        if window {
            for (w, &word) in valid.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let pos = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    visit(pos, true);
                }
            }
            counters.distance_ops += (k - i) as u64;
            counters.point_reads += (k - i) as u64;
            counters.skipped_candidates += i as u64;
        } else {
            for (pos, unsampled) in (0..k).map(|pos| (pos, valid[pos / 64] >> (pos % 64) & 1 == 1)) {
                visit(pos, unsampled);
            }
            counters.distance_ops += k as u64;
            counters.point_reads += k as u64;
        }
        valid[current / 64] &= !(1u64 << (current % 64));
        if i + 1 < m {
            current = best.expect("an unsampled candidate remains").2;
        }
    }
    out
}

/// Splits `total` samples over blocks: each block first gets
/// `floor(rate * size)` (capped at its size), then single samples are added
/// (or removed) in order of largest (smallest) fractional remainder until
/// the quotas sum to `total`. Ties go to the earlier block when adding and
/// the later block when removing.
pub fn allocate_quotas(sizes: &[usize], rate: f64, total: usize) -> Result<Vec<usize>> {
    if !(rate > 0.0 && rate <= 1.0) {
        bail!(Domain, "sampling rate must lie in (0, 1], got {rate}");
    }
    let n: usize = sizes.iter().sum();
    if total > n {
        bail!(Domain, "requested {total} samples from {n} points");
    }
    let raw: Vec<f64> = sizes.iter().map(|&s| rate * s as f64).collect();
    let mut quotas: Vec<usize> = raw
        .iter()
        .zip(sizes)
        .map(|(&r, &s)| (libm::floor(r) as usize).min(s))
        .collect();
    let remainder = |b: usize| raw[b] - libm::floor(raw[b]);
    let mut sum: usize = quotas.iter().sum();

    if sum < total {
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| remainder(b).total_cmp(&remainder(a)).then(a.cmp(&b)));
        while sum < total {
            for &b in &order {
                if sum == total {
                    break;
                }
                if quotas[b] < sizes[b] {
                    quotas[b] += 1;
                    sum += 1;
                }
            }
        }
    } else if sum > total {
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| remainder(a).total_cmp(&remainder(b)).then(b.cmp(&a)));
        while sum > total {
            for &b in &order {
                if sum == total {
                    break;
                }
                if quotas[b] > 0 {
                    quotas[b] -= 1;
                    sum -= 1;
                }
            }
        }
    }
    Ok(quotas)
}

/// Block-wise FPS: quotas from [`allocate_quotas`], then masked FPS inside
/// each block from its seed. Samples are concatenated in block order.
pub fn block_fps(
    cloud: &PointCloud,
    partition: &Partition,
    rate: f64,
    total_m: usize,
    seed: BlockSeed,
    counters: &mut CostCounters,
) -> Result<SampleResult> {
    if partition.num_points() != cloud.len() {
        bail!(Domain, "partition covers {} points, cloud has {}", partition.num_points(), cloud.len());
    }
    let quotas = allocate_quotas(&partition.block_sizes(), rate, total_m)?;
    let mut indices = Vec::with_capacity(total_m);
    for (b, &q) in quotas.iter().enumerate() {
        if q == 0 {
            continue;
        }
        let members = partition.block_indices(b);
        let start = match seed {
            BlockSeed::First => members[0],
            BlockSeed::LowestIndex => *members.iter().min().expect("blocks are non-empty"),
        };
        indices.extend(fps_over(cloud, members, q, start, true, counters));
    }
    Ok(SampleResult {
        indices,
        per_block_counts: Some(quotas),
        mode: SampleMode::Block,
    })
}
