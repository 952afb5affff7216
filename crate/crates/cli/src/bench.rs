//! Benchmark suites.
//!
//! * `scaling`: every partitioner over a list of cloud sizes.
//! * `ablation`: every partitioner at one size, with quality proxies.
//! * `threshold`: the fractal partitioner over a sweep of leaf thresholds,
//!   with quality proxies.
//!
//! Every run records partition stats and per-phase counters (partition,
//! block FPS, block ball query, block KNN) plus the analytical schedules.
//! Wall-clock time goes to the top-level `timing` array only, so stripping
//! that one field leaves a deterministic document.

use std::collections::HashMap;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use fpo_core::metrics::{fps_dispersion, neighbor_recall, QualityReport};
use fpo_core::partition::{partition_stats, Method, Partition};
use fpo_core::pointops::{
    block_ball_query, block_fps, block_knn, fps_window_check, global_ball_query, global_knn, BallQuery, BlockSeed,
    Centers, NeighborResult, SampleResult,
};
use fpo_core::schedule::{schedule_fps, schedule_neighbor, ScheduleConfig};
use fpo_core::synth::{generate, SynthKind, SynthSpec};
use fpo_core::{CostCounters, PointCloud};

use crate::commands::{auto_cells, build_partition, resolve_seed, write_json, KindArg, DEFAULT_MAX_DEPTH};
use crate::error::{FpoError, Result};
use crate::report::{real, CountersJson, PartitionParams, QualityJson, ScheduleJson, StatsJson, SCHEMA};

pub const DEFAULT_SIZES: [usize; 4] = [4096, 16384, 65536, 295936];
pub const DEFAULT_N: usize = 33 * 1024;
pub const DEFAULT_THRESHOLDS: [usize; 9] = [8, 16, 32, 64, 128, 256, 512, 1024, 4096];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Scaling,
    Ablation,
    Threshold,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Cloud sizes for `scaling`.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Cloud size for `ablation` and `threshold` [default: 33792].
    #[arg(long)]
    pub n: Option<usize>,
    /// Thresholds for `threshold`.
    #[arg(long, value_delimiter = ',')]
    pub ths: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "uniform-cube")]
    pub kind: KindArg,
    /// RNG seed [default: $FPO_SEED, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Leaf threshold for `scaling` and `ablation`.
    #[arg(long, default_value_t = 256)]
    pub th: usize,
    /// Sampling rate; also fixes the number of query centers.
    #[arg(long, default_value_t = 0.25)]
    pub rate: f64,
    /// Ball-query radius.
    #[arg(long, default_value_t = 0.1)]
    pub r: f64,
    /// Ball-query slots per center.
    #[arg(long, default_value_t = 32)]
    pub num: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 4)]
    pub units: usize,
    /// Report destination, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
}

/// Fully resolved suite configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub kind: String,
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub thresholds: Vec<usize>,
    pub methods: Vec<String>,
    pub rate: String,
    pub radius: String,
    pub num: usize,
    pub k: usize,
    pub units: usize,
    /// `block-sample`: neighbor centers are each run's own block FPS
    /// sample. `global-sample`: one global FPS sample shared by all runs of
    /// a cloud, which also feeds the quality oracles.
    pub centers: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasesJson {
    pub partition: CountersJson,
    pub fps: CountersJson,
    pub bq: CountersJson,
    pub knn: CountersJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulesJson {
    pub fps: ScheduleJson,
    pub neighbor: ScheduleJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRun {
    pub label: String,
    pub n: usize,
    pub num_centers: usize,
    pub params: PartitionParams,
    pub stats: StatsJson,
    pub phases: PhasesJson,
    /// Distance evaluations of FPS, ball query and KNN together.
    pub point_op_distance_ops: u64,
    pub schedule: SchedulesJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<QualityJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryJson {
    /// kdtree sort invocations at the largest size over the smallest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kdtree_sort_ratio: Option<String>,
    /// Largest minus smallest fractal traversal count across sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractal_traversal_spread: Option<u64>,
    /// Point-op distance evaluations strictly fall as th falls.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_ops_strictly_decreasing: Option<bool>,
    /// KNN recall never rises as th falls.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knn_recall_non_increasing: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingJson {
    pub label: String,
    pub partition_ms: f64,
    pub fps_ms: f64,
    pub bq_ms: f64,
    pub knn_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchReport {
    pub schema: String,
    pub command: String,
    pub config: SuiteConfig,
    pub runs: Vec<BenchRun>,
    pub summary: SummaryJson,
    /// Informational wall-clock times; not deterministic.
    pub timing: Vec<TimingJson>,
}

pub fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let config = suite_config(a)?;
    let report = run_suite(&config)?;
    write_json(&report, &a.out)
}

pub fn suite_config(a: &BenchArgs) -> Result<SuiteConfig> {
    if !(a.rate > 0.0 && a.rate <= 1.0) {
        return Err(FpoError::Usage(format!("--rate must lie in (0, 1], got {}", a.rate)));
    }
    let n = a.n.unwrap_or(DEFAULT_N);
    let (sizes, thresholds, methods) = match a.suite {
        Suite::Scaling => (a.sizes.clone().unwrap_or(DEFAULT_SIZES.to_vec()), vec![a.th], Method::ALL.to_vec()),
        Suite::Ablation => (vec![n], vec![a.th], Method::ALL.to_vec()),
        Suite::Threshold => (
            vec![n],
            a.ths.clone().unwrap_or(DEFAULT_THRESHOLDS.to_vec()),
            vec![Method::Fractal],
        ),
    };
    if sizes.is_empty() || sizes.contains(&0) || thresholds.is_empty() || thresholds.contains(&0) {
        return Err(FpoError::Usage("sizes and thresholds must be non-empty and positive".into()));
    }
    Ok(SuiteConfig {
        suite: a.suite,
        kind: a.kind.name().into(),
        seed: resolve_seed(a.seed)?,
        sizes,
        thresholds,
        methods: methods.iter().map(|m| m.name().to_string()).collect(),
        rate: real(a.rate),
        radius: real(a.r),
        num: a.num,
        k: a.k,
        units: a.units,
        centers: match a.suite {
            Suite::Scaling => "block-sample",
            _ => "global-sample",
        }
        .into(),
    })
}

fn parse_real(s: &str, what: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| FpoError::Usage(format!("invalid {what} `{s}`")))
}

fn params_for(method: Method, th: usize, n: usize) -> PartitionParams {
    let mut p = PartitionParams {
        method: method.name().into(),
        th: None,
        bs: None,
        cells: None,
        max_depth: None,
        start_dim: None,
    };
    match method {
        Method::Fractal => {
            p.th = Some(th);
            p.start_dim = Some(0);
        }
        Method::KdTree => {
            p.bs = Some(th);
            p.start_dim = Some(0);
        }
        Method::Uniform => p.cells = Some([auto_cells(n, th); 3]),
        Method::Octree => {
            p.th = Some(th);
            p.max_depth = Some(DEFAULT_MAX_DEPTH);
        }
    }
    p
}

/// Shared per-cloud reference data for `global-sample` suites.
struct Reference {
    sample: SampleResult,
    bq: HashMap<usize, usize>,
    bq_result: NeighborResult,
    knn_result: NeighborResult,
    dispersion: fpo_core::metrics::Dispersion,
}

impl Reference {
    fn build(cloud: &PointCloud, m: usize, ball: &BallQuery, k: usize) -> Result<Self> {
        let mut scratch = CostCounters::new();
        let sample = fps_window_check(cloud, m, 0, &mut scratch)?;
        let bq_result = global_ball_query(cloud, &sample.indices, ball, &mut scratch)?;
        let knn_result = global_knn(cloud, &sample.indices, k, &mut scratch)?;
        let bq = sample.indices.iter().enumerate().map(|(row, &c)| (c, row)).collect();
        let dispersion = fps_dispersion(&sample.indices, cloud)?;
        Ok(Reference {
            sample,
            bq,
            bq_result,
            knn_result,
            dispersion,
        })
    }

    /// The oracle rows reordered to match `block`.
    fn aligned(&self, oracle: &NeighborResult, block: &NeighborResult) -> NeighborResult {
        NeighborResult {
            query: oracle.query,
            entries: block
                .entries
                .iter()
                .map(|e| oracle.entries[self.bq[&e.center]].clone())
                .collect(),
        }
    }
}

pub fn run_suite(config: &SuiteConfig) -> Result<BenchReport> {
    let rate = parse_real(&config.rate, "rate")?;
    let radius = parse_real(&config.radius, "radius")?;
    let ball = BallQuery::new(radius, config.num);
    let sched = ScheduleConfig::new(config.units);
    let global_centers = config.centers == "global-sample";
    let mut runs = Vec::new();
    let mut timing = Vec::new();

    for &n in &config.sizes {
        let kind = SynthKind::from_name(&config.kind)
            .ok_or_else(|| FpoError::Usage(format!("unknown cloud kind `{}`", config.kind)))?;
        let cloud = generate(&SynthSpec {
            kind,
            n,
            seed: config.seed,
            feature_width: 0,
        })?
        .cloud;
        let m = ((rate * n as f64).floor() as usize).max(1);
        let reference = if global_centers {
            Some(Reference::build(&cloud, m, &ball, config.k)?)
        } else {
            None
        };

        for method_name in &config.methods {
            let method = Method::from_name(method_name).expect("suite methods are valid");
            for &th in &config.thresholds {
                let params = params_for(method, th, n);
                let label = match config.suite {
                    Suite::Threshold => format!("{}-th{th}", method.name()),
                    _ => format!("{}-n{n}", method.name()),
                };
                let (run, time) = run_one(&cloud, &params, &label, m, rate, &ball, config.k, &sched, reference.as_ref())?;
                runs.push(run);
                timing.push(time);
            }
        }
    }

    let summary = summarize(config, &runs);
    Ok(BenchReport {
        schema: SCHEMA.into(),
        command: "bench".into(),
        config: config.clone(),
        runs,
        summary,
        timing,
    })
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    cloud: &PointCloud,
    params: &PartitionParams,
    label: &str,
    m: usize,
    rate: f64,
    ball: &BallQuery,
    k: usize,
    sched: &ScheduleConfig,
    reference: Option<&Reference>,
) -> Result<(BenchRun, TimingJson)> {
    let t = Instant::now();
    let mut pc = CostCounters::new();
    let partition: Partition = build_partition(params, cloud, &mut pc)?;
    let partition_ms = millis(t);
    let stats = partition_stats(&partition, &pc);

    let t = Instant::now();
    let mut fc = CostCounters::new();
    let sample = block_fps(cloud, &partition, rate, m, BlockSeed::First, &mut fc)?;
    let fps_ms = millis(t);

    let centers = Centers::from_samples(&partition, reference.map_or(&sample, |r| &r.sample));
    let per_block: Vec<usize> = match &centers {
        Centers::PerBlock(sets) => sets.iter().map(Vec::len).collect(),
        Centers::AllPoints => partition.block_sizes(),
    };

    let t = Instant::now();
    let mut bc = CostCounters::new();
    let bq = block_ball_query(cloud, &partition, &centers, ball, &mut bc)?;
    let bq_ms = millis(t);

    let t = Instant::now();
    let mut kc = CostCounters::new();
    let knn = block_knn(cloud, &partition, &centers, k, &mut kc)?;
    let knn_ms = millis(t);

    let quotas = sample.per_block_counts.clone().unwrap_or_default();
    let schedule = SchedulesJson {
        fps: ScheduleJson::from(&schedule_fps(&partition.block_sizes(), &quotas, sched)?),
        neighbor: ScheduleJson::from(&schedule_neighbor(&partition, &per_block, sched)?),
    };

    let quality = match reference {
        Some(r) if m >= 2 => {
            let block = fps_dispersion(&sample.indices, cloud)?;
            let bq_recall = neighbor_recall(&bq, &r.aligned(&r.bq_result, &bq))?;
            let knn_recall = neighbor_recall(&knn, &r.aligned(&r.knn_result, &knn))?;
            Some(QualityJson::from(&QualityReport::from_parts(
                block,
                r.dispersion,
                bq_recall,
                knn_recall,
            )))
        }
        _ => None,
    };

    let run = BenchRun {
        label: label.into(),
        n: cloud.len(),
        num_centers: bq.entries.len(),
        params: params.clone(),
        stats: StatsJson::from(&stats),
        point_op_distance_ops: fc.distance_ops + bc.distance_ops + kc.distance_ops,
        phases: PhasesJson {
            partition: CountersJson::new(&pc, 0),
            fps: CountersJson::new(&fc, 0),
            bq: CountersJson::new(&bc, 0),
            knn: CountersJson::new(&kc, 0),
        },
        schedule,
        quality,
    };
    let time = TimingJson {
        label: label.into(),
        partition_ms,
        fps_ms,
        bq_ms,
        knn_ms,
    };
    Ok((run, time))
}

fn summarize(config: &SuiteConfig, runs: &[BenchRun]) -> SummaryJson {
    let mut s = SummaryJson {
        kdtree_sort_ratio: None,
        fractal_traversal_spread: None,
        distance_ops_strictly_decreasing: None,
        knn_recall_non_increasing: None,
    };
    match config.suite {
        Suite::Scaling => {
            let of = |m: &str| -> Vec<&BenchRun> { runs.iter().filter(|r| r.params.method == m).collect() };
            let kd = of(Method::KdTree.name());
            if let (Some(lo), Some(hi)) = (kd.iter().min_by_key(|r| r.n), kd.iter().max_by_key(|r| r.n)) {
                let (a, b) = (lo.phases.partition.sort_invocations, hi.phases.partition.sort_invocations);
                if a > 0 {
                    s.kdtree_sort_ratio = Some(real(b as f64 / a as f64));
                }
            }
            let rounds: Vec<u64> = of(Method::Fractal.name())
                .iter()
                .map(|r| r.phases.partition.traversal_rounds)
                .collect();
            if let (Some(lo), Some(hi)) = (rounds.iter().min(), rounds.iter().max()) {
                s.fractal_traversal_spread = Some(hi - lo);
            }
        }
        Suite::Threshold => {
            // Walk from the largest threshold down.
            let mut by_th: Vec<&BenchRun> = runs.iter().collect();
            by_th.sort_by_key(|r| std::cmp::Reverse(r.params.th));
            s.distance_ops_strictly_decreasing = Some(
                by_th
                    .windows(2)
                    .all(|w| w[1].point_op_distance_ops < w[0].point_op_distance_ops),
            );
            let recalls: Option<Vec<f64>> = by_th
                .iter()
                .map(|r| r.quality.as_ref().and_then(|q| q.knn_recall.parse().ok()))
                .collect();
            s.knn_recall_non_increasing = recalls.map(|v| v.windows(2).all(|w| w[1] <= w[0]));
        }
        Suite::Ablation => {}
    }
    s
}
