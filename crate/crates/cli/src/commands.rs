//! Command-line surface: argument types and the `gen`, `partition` and `ops`
//! commands. Benchmark suites live in [`crate::bench`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fpo_core::geometry::distance;
use fpo_core::metrics::{fps_dispersion, neighbor_recall};
use fpo_core::partition::{
    fractal_partition, kdtree_partition, octree_partition, partition_stats, uniform_partition, Method, Partition,
};
use fpo_core::pointops::{
    block_ball_query, block_fps, block_gather, block_knn, fps_window_check, gather, global_ball_query, global_fps,
    global_knn, BallOrder, BallQuery, BlockSeed, Centers, GatherResult, NeighborResult, Query, SampleResult,
};
use fpo_core::schedule::{schedule_fps, schedule_neighbor, ScheduleConfig};
use fpo_core::synth::{generate, SynthKind, SynthSpec};
use fpo_core::{CostCounters, PointCloud};

use crate::bench::{self, BenchArgs};
use crate::error::{FpoError, Result};
use crate::io::{load_cloud, save_cloud, write_xyz, Format};
use crate::report::{
    real, CountersJson, InputJson, PartitionParams, PartitionReport, ScheduleJson, StatsJson, SCHEMA,
};

/// Environment variable that replaces the default RNG seed.
pub const SEED_ENV: &str = "FPO_SEED";

#[derive(Debug, Parser)]
#[command(name = "fpo", version, about = "Point-cloud partitioning and block-wise point operations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cloud.
    Gen(GenArgs),
    /// Partition a cloud and report the tree.
    Partition(PartitionCmd),
    /// Run one point operation, optionally against the global oracle.
    Ops(OpsArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    UniformCube,
    GaussianClusters,
    Planar,
    TwoDenseRegions,
    WithOutliers,
}

impl KindArg {
    pub fn name(self) -> &'static str {
        match self {
            KindArg::UniformCube => "uniform-cube",
            KindArg::GaussianClusters => "gaussian-clusters",
            KindArg::Planar => "planar",
            KindArg::TwoDenseRegions => "two-dense-regions",
            KindArg::WithOutliers => "with-outliers",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Fractal,
    Uniform,
    Kdtree,
    Octree,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Fractal => Method::Fractal,
            MethodArg::Uniform => Method::Uniform,
            MethodArg::Kdtree => Method::KdTree,
            MethodArg::Octree => Method::Octree,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    /// RNG seed [default: $FPO_SEED, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-point feature width.
    #[arg(long, default_value_t = 0)]
    pub features: usize,
    #[arg(long)]
    pub side: Option<f64>,
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Output file. Without it the cloud is printed as xyz-text.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: from the file extension].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Metadata destination, `-` for stdout [default: `-` when --out is given].
    #[arg(long)]
    pub json: Option<String>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input format [default: from the file extension].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl InputArgs {
    fn load(&self) -> Result<(PointCloud, InputJson)> {
        let format = self.format.unwrap_or_else(|| Format::from_path(&self.input));
        let cloud = load_cloud(&self.input, format)?;
        let input = InputJson {
            path: self.input.display().to_string(),
            n: cloud.len(),
            c: cloud.feature_width(),
        };
        Ok((cloud, input))
    }
}

#[derive(Debug, Args, Default)]
pub struct PartitionArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Leaf threshold for fractal and octree [default: 256].
    #[arg(long)]
    pub th: Option<usize>,
    /// KD-tree leaf size [default: --th, else 256].
    #[arg(long)]
    pub bs: Option<usize>,
    /// Uniform grid cells: one count for all axes or `x,y,z`
    /// [default: ceil(cbrt(n / 256)) per axis].
    #[arg(long)]
    pub cells: Option<String>,
    /// Octree depth limit [default: 16].
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// First split axis for fractal and kdtree [default: 0].
    #[arg(long)]
    pub start_dim: Option<usize>,
}

pub const DEFAULT_TH: usize = 256;
pub const DEFAULT_MAX_DEPTH: usize = 16;

impl PartitionArgs {
    fn any_set(&self) -> bool {
        self.method.is_some()
            || self.th.is_some()
            || self.bs.is_some()
            || self.cells.is_some()
            || self.max_depth.is_some()
            || self.start_dim.is_some()
    }

    /// Resolves defaults against a cloud of `n` points.
    pub fn params(&self, n: usize) -> Result<PartitionParams> {
        let method = self
            .method
            .ok_or_else(|| FpoError::Usage("--method is required".into()))?;
        let th = self.th.unwrap_or(DEFAULT_TH);
        let start_dim = self.start_dim.unwrap_or(0);
        if start_dim > 2 {
            return Err(FpoError::Usage(format!("--start-dim must be 0, 1 or 2, got {start_dim}")));
        }
        let mut p = PartitionParams {
            method: Method::from(method).name().into(),
            th: None,
            bs: None,
            cells: None,
            max_depth: None,
            start_dim: None,
        };
        match method {
            MethodArg::Fractal => {
                p.th = Some(th);
                p.start_dim = Some(start_dim);
            }
            MethodArg::Kdtree => {
                p.bs = Some(self.bs.unwrap_or(th));
                p.start_dim = Some(start_dim);
            }
            MethodArg::Uniform => {
                p.cells = Some(match &self.cells {
                    Some(s) => parse_cells(s)?,
                    None => [auto_cells(n, th); 3],
                });
            }
            MethodArg::Octree => {
                p.th = Some(th);
                p.max_depth = Some(self.max_depth.unwrap_or(DEFAULT_MAX_DEPTH));
            }
        }
        Ok(p)
    }
}

/// Cells per axis so that a uniform cloud averages about `per_cell` points
/// per cell.
pub fn auto_cells(n: usize, per_cell: usize) -> usize {
    let mut k = 1usize;
    while k * k * k * per_cell < n {
        k += 1;
    }
    k
}

fn parse_cells(s: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| FpoError::Usage(format!("invalid --cells value `{s}`")))
    };
    match parts.as_slice() {
        [one] => Ok([parse(one)?; 3]),
        [x, y, z] => Ok([parse(x)?, parse(y)?, parse(z)?]),
        _ => Err(FpoError::Usage(format!("--cells takes one count or three, got `{s}`"))),
    }
}

/// Builds the partition described by `params`.
pub fn build_partition(params: &PartitionParams, cloud: &PointCloud, counters: &mut CostCounters) -> Result<Partition> {
    let missing = |what: &str| FpoError::Usage(format!("{} partition needs {what}", params.method));
    let method = Method::from_name(&params.method)
        .ok_or_else(|| FpoError::Usage(format!("unknown partition method `{}`", params.method)))?;
    let partition = match method {
        Method::Fractal => fractal_partition(
            cloud,
            params.th.ok_or_else(|| missing("th"))?,
            params.start_dim.unwrap_or(0),
            counters,
        )?,
        Method::KdTree => kdtree_partition(
            cloud,
            params.bs.ok_or_else(|| missing("bs"))?,
            params.start_dim.unwrap_or(0),
            counters,
        )?,
        Method::Uniform => uniform_partition(cloud, params.cells.ok_or_else(|| missing("cells"))?, counters)?,
        Method::Octree => octree_partition(
            cloud,
            params.th.ok_or_else(|| missing("th"))?,
            params.max_depth.ok_or_else(|| missing("max_depth"))?,
            counters,
        )?,
    };
    Ok(partition)
}

#[derive(Debug, Args)]
pub struct PartitionCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub partition: PartitionArgs,
    /// Report destination, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub json: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    Fps,
    Bq,
    Knn,
    Gather,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Global,
    Block,
}

#[derive(Debug, Args)]
pub struct OpsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub op: OpArg,
    #[arg(long, value_enum, default_value = "global")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub inline: PartitionArgs,
    /// Partition report written by `fpo partition`.
    #[arg(long, conflicts_with = "method")]
    pub partition: Option<PathBuf>,
    /// Number of samples (also the number of query centers).
    #[arg(long)]
    pub m: Option<usize>,
    /// Block sampling rate in (0, 1] [default: m / n, else 0.25].
    #[arg(long)]
    pub rate: Option<f64>,
    /// Global FPS seed point.
    #[arg(long, default_value_t = 0)]
    pub seed_index: usize,
    /// Seed each block at its lowest original index instead of its first
    /// point in layout order.
    #[arg(long)]
    pub lowest_index_seed: bool,
    /// Ball-query radius.
    #[arg(long, default_value_t = 0.1)]
    pub r: f64,
    /// Ball-query slots per center.
    #[arg(long, default_value_t = 32)]
    pub num: usize,
    /// Keep the nearest in-range points instead of the first found.
    #[arg(long)]
    pub nearest: bool,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Processing units for the block schedule.
    #[arg(long, default_value_t = 4)]
    pub units: usize,
    /// Also run the global brute-force reference and check invariants.
    #[arg(long)]
    pub verify_oracle: bool,
    /// Report destination, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub json: String,
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Partition(a) => cmd_partition(&a),
        Command::Ops(a) => cmd_ops(&a),
        Command::Bench(a) => bench::cmd_bench(&a),
    }
}

/// `flag`, else `$FPO_SEED`, else 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| FpoError::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(FpoError::Usage(format!("{SEED_ENV}: {e}"))),
    }
}

/// Writes `value` as pretty JSON to a file or, for `-`, to stdout.
pub fn write_json<T: Serialize>(value: &T, dest: &str) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(&text, dest)
}

fn write_text(text: &str, dest: &str) -> Result<()> {
    if dest == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| FpoError::io("<stdout>", e))
    } else {
        fs::write(dest, text).map_err(|e| FpoError::io(dest, e))
    }
}

// ---------------------------------------------------------------- gen

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenReport {
    pub schema: String,
    pub command: String,
    pub kind: String,
    pub n: usize,
    pub c: usize,
    pub seed: u64,
    pub params: KindParams,
    pub output: Option<String>,
    pub format: String,
    pub outlier_count: usize,
    pub outliers: Vec<usize>,
}

fn synth_kind(a: &GenArgs) -> SynthKind {
    let mut kind = SynthKind::from_name(a.kind.name()).expect("clap names match generator names");
    match &mut kind {
        SynthKind::UniformCube { side } => *side = a.side.unwrap_or(*side),
        SynthKind::GaussianClusters { clusters, sigma } => {
            *clusters = a.clusters.unwrap_or(*clusters);
            *sigma = a.sigma.unwrap_or(*sigma);
        }
        SynthKind::Planar { z } => *z = a.z.unwrap_or(*z),
        SynthKind::TwoDenseRegions { sigma, separation } => {
            *sigma = a.sigma.unwrap_or(*sigma);
            *separation = a.separation.unwrap_or(*separation);
        }
        SynthKind::WithOutliers {
            fraction,
            clusters,
            sigma,
        } => {
            *fraction = a.fraction.unwrap_or(*fraction);
            *clusters = a.clusters.unwrap_or(*clusters);
            *sigma = a.sigma.unwrap_or(*sigma);
        }
    }
    kind
}

fn kind_params(kind: &SynthKind) -> KindParams {
    let mut p = KindParams {
        side: None,
        clusters: None,
        sigma: None,
        separation: None,
        z: None,
        fraction: None,
    };
    match *kind {
        SynthKind::UniformCube { side } => p.side = Some(real(side)),
        SynthKind::GaussianClusters { clusters, sigma } => {
            p.clusters = Some(clusters);
            p.sigma = Some(real(sigma));
        }
        SynthKind::Planar { z } => p.z = Some(real(z)),
        SynthKind::TwoDenseRegions { sigma, separation } => {
            p.sigma = Some(real(sigma));
            p.separation = Some(real(separation));
        }
        SynthKind::WithOutliers {
            fraction,
            clusters,
            sigma,
        } => {
            p.fraction = Some(real(fraction));
            p.clusters = Some(clusters);
            p.sigma = Some(real(sigma));
        }
    }
    p
}

pub fn cmd_gen(a: &GenArgs) -> Result<()> {
    let seed = resolve_seed(a.seed)?;
    let kind = synth_kind(a);
    let spec = SynthSpec {
        kind,
        n: a.n,
        seed,
        feature_width: a.features,
    };
    let synth = generate(&spec)?;
    let format = match (&a.out, a.format) {
        (_, Some(f)) => f,
        (Some(p), None) => Format::from_path(p),
        (None, None) => Format::XyzText,
    };
    let json_dest = match (&a.out, &a.json) {
        (_, Some(d)) => Some(d.as_str()),
        (Some(_), None) => Some("-"),
        (None, None) => None,
    };
    match &a.out {
        Some(path) => save_cloud(&synth.cloud, path, format)?,
        None => {
            if format != Format::XyzText {
                return Err(FpoError::Usage("binary output needs --out".into()));
            }
            if json_dest == Some("-") {
                return Err(FpoError::Usage("cloud and metadata cannot both go to stdout".into()));
            }
            write_text(&write_xyz(&synth.cloud), "-")?;
        }
    }
    if let Some(dest) = json_dest {
        let report = GenReport {
            schema: SCHEMA.into(),
            command: "gen".into(),
            kind: kind.name().into(),
            n: a.n,
            c: a.features,
            seed,
            params: kind_params(&kind),
            output: a.out.as_ref().map(|p| p.display().to_string()),
            format: format.to_possible_value().expect("named").get_name().into(),
            outlier_count: synth.outliers.len(),
            outliers: synth.outliers,
        };
        write_json(&report, dest)?;
    }
    Ok(())
}

// ---------------------------------------------------------- partition

pub fn cmd_partition(a: &PartitionCmd) -> Result<()> {
    let (cloud, input) = a.input.load()?;
    let params = a.partition.params(cloud.len())?;
    let mut counters = CostCounters::new();
    let partition = build_partition(&params, &cloud, &mut counters)?;
    let stats = partition_stats(&partition, &counters);
    let report = PartitionReport::new(input, params, &partition, &stats, &counters);
    write_json(&report, &a.json)
}

/// Rebuilds the partition recorded in a report and checks that it matches.
pub fn load_partition_artifact(path: &Path, cloud: &PointCloud) -> Result<(PartitionParams, Partition, CostCounters)> {
    let text = fs::read_to_string(path).map_err(|e| FpoError::io(path, e))?;
    let report: PartitionReport = serde_json::from_str(&text)?;
    if report.schema != SCHEMA || report.command != "partition" {
        return Err(FpoError::Invariant(format!(
            "{} is not a partition report ({} / {})",
            path.display(),
            report.schema,
            report.command
        )));
    }
    if report.input.n != cloud.len() {
        return Err(FpoError::Invariant(format!(
            "partition covers {} points, input has {}",
            report.input.n,
            cloud.len()
        )));
    }
    let mut counters = CostCounters::new();
    let partition = build_partition(&report.params, cloud, &mut counters)?;
    let ranges: Vec<[usize; 2]> = partition.blocks().map(|b| [b.range.start, b.range.end]).collect();
    let recorded: Vec<[usize; 2]> = report.blocks.iter().map(|b| b.range).collect();
    if partition.layout().as_slice() != report.permutation.as_slice() || ranges != recorded {
        return Err(FpoError::Invariant(format!(
            "partition in {} does not match the input cloud",
            path.display()
        )));
    }
    Ok((report.params, partition, counters))
}

// ---------------------------------------------------------------- ops

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpParams {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<String>,
    pub seed_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_seed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSummary {
    pub params: PartitionParams,
    pub stats: StatsJson,
    pub counters: CountersJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleJson {
    pub indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_block_counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborhoodJson {
    pub center: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    pub search_space: String,
    pub count: usize,
    pub found: Vec<usize>,
    pub distances: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborsJson {
    pub query: QueryJson,
    pub entries: Vec<NeighborhoodJson>,
}

impl From<&NeighborResult> for NeighborsJson {
    fn from(r: &NeighborResult) -> Self {
        let query = match r.query {
            Query::Ball { radius, num } => QueryJson {
                kind: "ball".into(),
                radius: Some(real(radius)),
                num: Some(num),
                k: None,
            },
            Query::Knn { k } => QueryJson {
                kind: "knn".into(),
                radius: None,
                num: None,
                k: Some(k),
            },
        };
        NeighborsJson {
            query,
            entries: r
                .entries
                .iter()
                .map(|e| NeighborhoodJson {
                    center: e.center,
                    block: e.block,
                    search_space: e.search_space.name().into(),
                    count: e.count(),
                    found: e.found.clone(),
                    distances: e.distances.iter().map(|&d| real(d)).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatherRowJson {
    pub center: usize,
    pub padded: bool,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatherJson {
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<[Vec<usize>; 2]>,
    pub rows: Vec<GatherRowJson>,
}

fn gather_json(r: &GatherResult, schedule: Option<[Vec<usize>; 2]>) -> GatherJson {
    GatherJson {
        width: r.width,
        schedule,
        rows: r
            .rows
            .iter()
            .map(|row| GatherRowJson {
                center: row.center,
                padded: row.padded,
                values: row.values.iter().map(|&v| real(v)).collect(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum OpResult {
    Sample(SampleJson),
    Neighbors(NeighborsJson),
    Gather(GatherJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckJson {
    pub name: String,
    pub hard: bool,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleJson {
    pub passed: bool,
    pub checks: Vec<CheckJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_identical: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recall: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps_dispersion_ratio: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_radius_ratio: Option<String>,
    pub counters: CountersJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpsReport {
    pub schema: String,
    pub command: String,
    pub op: String,
    pub mode: String,
    pub input: InputJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSummary>,
    pub params: OpParams,
    pub result: OpResult,
    pub counters: CountersJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleJson>,
}

#[derive(Default)]
struct Oracle {
    checks: Vec<CheckJson>,
    equivalent: Option<bool>,
    bit_identical: Option<bool>,
    recall: Option<f64>,
    dispersion: Option<(f64, f64)>,
    counters: CostCounters,
}

impl Oracle {
    fn check(&mut self, name: &str, hard: bool, passed: bool, detail: Option<String>) {
        self.checks.push(CheckJson {
            name: name.into(),
            hard,
            passed,
            detail: if passed { None } else { detail },
        });
    }

    fn hard_failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| c.hard && !c.passed)
            .map(|c| c.name.clone())
            .collect()
    }

    fn into_json(self, c: usize) -> OracleJson {
        OracleJson {
            passed: self.checks.iter().all(|c| c.passed),
            equivalent: self.equivalent,
            bit_identical: self.bit_identical,
            recall: self.recall.map(real),
            fps_dispersion_ratio: self.dispersion.map(|d| real(d.0)),
            coverage_radius_ratio: self.dispersion.map(|d| real(d.1)),
            counters: CountersJson::new(&self.counters, c),
            checks: self.checks,
        }
    }
}

struct OpsContext<'a> {
    a: &'a OpsArgs,
    cloud: &'a PointCloud,
    partition: Option<&'a Partition>,
    m: usize,
    rate: f64,
    counters: CostCounters,
    oracle: Option<Oracle>,
    schedule: Option<ScheduleJson>,
}

pub fn cmd_ops(a: &OpsArgs) -> Result<()> {
    let (cloud, input) = a.input.load()?;
    let n = cloud.len();
    let (m, rate) = sample_size(a, n)?;

    let block = a.mode == ModeArg::Block;
    let mut summary = None;
    let partition = if block {
        let (params, partition, pc) = match (&a.partition, a.inline.any_set()) {
            (Some(path), false) => load_partition_artifact(path, &cloud)?,
            (None, true) => {
                let params = a.inline.params(n)?;
                let mut pc = CostCounters::new();
                let p = build_partition(&params, &cloud, &mut pc)?;
                (params, p, pc)
            }
            (Some(_), true) => {
                return Err(FpoError::Usage(
                    "give either --partition or inline partition flags, not both".into(),
                ))
            }
            (None, false) => {
                return Err(FpoError::Usage(
                    "block mode needs --partition or inline partition flags (--method ...)".into(),
                ))
            }
        };
        summary = Some(PartitionSummary {
            stats: StatsJson::from(&partition_stats(&partition, &pc)),
            counters: CountersJson::new(&pc, cloud.feature_width()),
            params,
        });
        Some(partition)
    } else {
        if a.partition.is_some() || a.inline.any_set() {
            return Err(FpoError::Usage("partition flags need --mode block".into()));
        }
        None
    };
    if a.op == OpArg::Gather && !cloud.has_features() {
        return Err(fpo_core::Error::Domain("gather needs per-point features; the input has none".into()).into());
    }

    let mut ctx = OpsContext {
        a,
        cloud: &cloud,
        partition: partition.as_ref(),
        m,
        rate,
        counters: CostCounters::new(),
        oracle: a.verify_oracle.then(Oracle::default),
        schedule: None,
    };
    let result = match a.op {
        OpArg::Fps => OpResult::Sample(run_fps(&mut ctx)?),
        OpArg::Bq | OpArg::Knn => OpResult::Neighbors(run_neighbors(&mut ctx)?),
        OpArg::Gather => OpResult::Gather(run_gather(&mut ctx)?),
    };

    let c = cloud.feature_width();
    let failures = ctx.oracle.as_ref().map(Oracle::hard_failures).unwrap_or_default();
    let params = OpParams {
        m,
        rate: block.then(|| real(rate)),
        seed_index: a.seed_index,
        block_seed: block.then(|| if a.lowest_index_seed { "lowest-index" } else { "first" }.to_string()),
        radius: matches!(a.op, OpArg::Bq | OpArg::Gather).then(|| real(a.r)),
        num: matches!(a.op, OpArg::Bq | OpArg::Gather).then_some(a.num),
        order: matches!(a.op, OpArg::Bq | OpArg::Gather)
            .then(|| if a.nearest { "nearest" } else { "first-found" }.to_string()),
        k: (a.op == OpArg::Knn).then_some(a.k),
    };
    let report = OpsReport {
        schema: SCHEMA.into(),
        command: "ops".into(),
        op: a.op.to_possible_value().expect("named").get_name().into(),
        mode: a.mode.to_possible_value().expect("named").get_name().into(),
        input,
        partition: summary,
        params,
        result,
        counters: CountersJson::new(&ctx.counters, c),
        schedule: ctx.schedule,
        oracle: ctx.oracle.map(|o| o.into_json(c)),
    };
    write_json(&report, &a.json)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(FpoError::Invariant(format!("oracle checks failed: {}", failures.join(", "))))
    }
}

/// Resolves `(m, rate)`: `m` wins, then `rate`, then a quarter of the cloud.
fn sample_size(a: &OpsArgs, n: usize) -> Result<(usize, f64)> {
    if let Some(r) = a.rate {
        if !(r > 0.0 && r <= 1.0) {
            return Err(FpoError::Usage(format!("--rate must lie in (0, 1], got {r}")));
        }
    }
    let m = match (a.m, a.rate) {
        (Some(m), _) => m,
        (None, Some(r)) => ((r * n as f64).floor() as usize).max(1),
        (None, None) => (n / 4).max(1),
    };
    if m == 0 || m > n {
        return Err(FpoError::Usage(format!("--m must lie in 1..={n}, got {m}")));
    }
    let rate = a.rate.unwrap_or(m as f64 / n as f64);
    Ok((m, rate))
}

impl OpsContext<'_> {
    fn block_seed(&self) -> BlockSeed {
        if self.a.lowest_index_seed {
            BlockSeed::LowestIndex
        } else {
            BlockSeed::First
        }
    }

    /// Samples `m` points in the current mode.
    fn sample(&mut self) -> Result<SampleResult> {
        match self.partition {
            None => Ok(fps_window_check(self.cloud, self.m, self.a.seed_index, &mut self.counters)?),
            Some(p) => Ok(block_fps(self.cloud, p, self.rate, self.m, self.block_seed(), &mut self.counters)?),
        }
    }

    fn ball(&self) -> BallQuery {
        BallQuery {
            radius: self.a.r,
            num: self.a.num,
            order: if self.a.nearest {
                BallOrder::Nearest
            } else {
                BallOrder::FirstFound
            },
        }
    }
}

fn run_fps(ctx: &mut OpsContext) -> Result<SampleJson> {
    let sample = ctx.sample()?;
    if let Some(p) = ctx.partition {
        let quotas = sample.per_block_counts.clone().unwrap_or_default();
        let report = schedule_fps(&p.block_sizes(), &quotas, &ScheduleConfig::new(ctx.a.units))?;
        ctx.schedule = Some(ScheduleJson::from(&report));
    }
    if let Some(oracle) = ctx.oracle.as_mut() {
        let reference = global_fps(ctx.cloud, ctx.m, ctx.a.seed_index, &mut oracle.counters)?;
        match ctx.partition {
            None => {
                let n = ctx.cloud.len() as u64;
                let expected: u64 = (0..ctx.m as u64).map(|i| n - i).sum();
                let same = sample.indices == reference.indices;
                oracle.equivalent = Some(same);
                oracle.check("skip-equivalence", true, same, Some("window-check sample differs from the naive scan".into()));
                oracle.check(
                    "skip-distance-ops",
                    true,
                    ctx.counters.distance_ops == expected,
                    Some(format!("expected {expected}, counted {}", ctx.counters.distance_ops)),
                );
            }
            Some(p) => {
                check_block_sample(oracle, p, &sample, ctx.m);
                if ctx.m >= 2 {
                    let b = fps_dispersion(&sample.indices, ctx.cloud)?;
                    let g = fps_dispersion(&reference.indices, ctx.cloud)?;
                    oracle.dispersion = Some((b.min_pairwise / g.min_pairwise, b.coverage_radius / g.coverage_radius));
                }
            }
        }
    }
    Ok(SampleJson {
        indices: sample.indices,
        per_block_counts: sample.per_block_counts,
    })
}

fn check_block_sample(oracle: &mut Oracle, p: &Partition, sample: &SampleResult, m: usize) {
    let quotas = sample.per_block_counts.clone().unwrap_or_default();
    oracle.check(
        "quota-conservation",
        true,
        quotas.iter().sum::<usize>() == m && sample.indices.len() == m,
        Some(format!("quotas sum to {}, {} samples", quotas.iter().sum::<usize>(), sample.indices.len())),
    );
    let owner = p.block_of_points();
    let mut expected_owner = Vec::with_capacity(m);
    for (b, &q) in quotas.iter().enumerate() {
        expected_owner.extend(std::iter::repeat_n(b, q));
    }
    let in_block = sample.indices.len() == expected_owner.len()
        && sample.indices.iter().zip(&expected_owner).all(|(&i, &b)| owner[i] == b);
    let mut sorted = sample.indices.clone();
    sorted.sort_unstable();
    sorted.dedup();
    oracle.check("samples-within-blocks", true, in_block, Some("a sample lies outside its block".into()));
    oracle.check(
        "samples-distinct",
        true,
        sorted.len() == sample.indices.len(),
        Some("a point was sampled twice".into()),
    );
}

/// Runs the neighbor op of `ctx` over the sampled centers.
fn neighbors_for(ctx: &mut OpsContext, op: OpArg) -> Result<NeighborResult> {
    let sample = ctx.sample()?;
    let result = match (ctx.partition, op) {
        (None, OpArg::Knn) => global_knn(ctx.cloud, &sample.indices, ctx.a.k, &mut ctx.counters)?,
        (None, _) => global_ball_query(ctx.cloud, &sample.indices, &ctx.ball(), &mut ctx.counters)?,
        (Some(p), _) => {
            let centers = Centers::from_samples(p, &sample);
            let per_block: Vec<usize> = match &centers {
                Centers::PerBlock(sets) => sets.iter().map(Vec::len).collect(),
                Centers::AllPoints => p.block_sizes(),
            };
            let report = schedule_neighbor(p, &per_block, &ScheduleConfig::new(ctx.a.units))?;
            ctx.schedule = Some(ScheduleJson::from(&report));
            if op == OpArg::Knn {
                block_knn(ctx.cloud, p, &centers, ctx.a.k, &mut ctx.counters)?
            } else {
                block_ball_query(ctx.cloud, p, &centers, &ctx.ball(), &mut ctx.counters)?
            }
        }
    };
    Ok(result)
}

fn run_neighbors(ctx: &mut OpsContext) -> Result<NeighborsJson> {
    let op = ctx.a.op;
    let result = neighbors_for(ctx, op)?;
    if let Some(mut oracle) = ctx.oracle.take() {
        let centers = result.centers();
        let reference = if op == OpArg::Knn {
            global_knn(ctx.cloud, &centers, ctx.a.k, &mut oracle.counters)?
        } else {
            global_ball_query(ctx.cloud, &centers, &ctx.ball(), &mut oracle.counters)?
        };
        oracle.recall = Some(neighbor_recall(&result, &reference)?);
        if ctx.partition.is_none() {
            let same = result == reference;
            oracle.equivalent = Some(same);
            oracle.check("global-equivalence", true, same, Some("result differs from the brute-force reference".into()));
        }
        match op {
            OpArg::Knn => {
                let bad = knn_violation(ctx.cloud, ctx.partition, &result, ctx.a.k);
                oracle.check("within-space-optimality", true, bad.is_none(), bad);
            }
            _ => {
                let bad = ball_violation(ctx.cloud, ctx.partition, &result, &ctx.ball());
                oracle.check("subset-soundness", true, bad.is_none(), bad);
            }
        }
        ctx.oracle = Some(oracle);
    }
    Ok(NeighborsJson::from(&result))
}

/// Candidates a center may legally return.
fn space_of(cloud: &PointCloud, partition: Option<&Partition>, block: Option<usize>) -> Vec<usize> {
    match (partition, block) {
        (Some(p), Some(b)) => {
            let mut s = p.search_space(b).map(|s| s.indices.to_vec()).unwrap_or_default();
            s.sort_unstable();
            s
        }
        _ => (0..cloud.len()).collect(),
    }
}

/// Every found point is in the search space, within the radius, distinct,
/// and there are at most `num` of them; an under-full row holds every
/// in-range candidate.
fn ball_violation(
    cloud: &PointCloud,
    partition: Option<&Partition>,
    result: &NeighborResult,
    q: &BallQuery,
) -> Option<String> {
    for e in &result.entries {
        let space = space_of(cloud, partition, e.block);
        let c = cloud.point(e.center);
        let in_range = space.iter().filter(|&&j| distance(c, cloud.point(j)) <= q.radius).count();
        let mut seen = e.found.clone();
        seen.sort_unstable();
        seen.dedup();
        let ok = e.found.len() <= q.num
            && seen.len() == e.found.len()
            && e.found.len() == in_range.min(q.num)
            && e.found.iter().all(|&j| {
                space.binary_search(&j).is_ok() && distance(c, cloud.point(j)) <= q.radius
            });
        if !ok {
            return Some(format!("center {}", e.center));
        }
    }
    None
}

/// Every row equals the `k` smallest `(distance, index)` pairs of its space.
fn knn_violation(cloud: &PointCloud, partition: Option<&Partition>, result: &NeighborResult, k: usize) -> Option<String> {
    for e in &result.entries {
        let c = cloud.point(e.center);
        let mut all: Vec<(f64, usize)> = space_of(cloud, partition, e.block)
            .into_iter()
            .map(|j| (distance(c, cloud.point(j)), j))
            .collect();
        all.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        all.truncate(k);
        let expected: Vec<usize> = all.iter().map(|p| p.1).collect();
        if expected != e.found {
            return Some(format!("center {}", e.center));
        }
    }
    None
}

fn run_gather(ctx: &mut OpsContext) -> Result<GatherJson> {
    let neighbors = {
        // Neighbor search is a separate phase; only the gather is charged.
        let saved = std::mem::take(&mut ctx.counters);
        let oracle = ctx.oracle.take();
        let nb = neighbors_for(ctx, OpArg::Bq)?;
        ctx.oracle = oracle;
        ctx.counters = saved;
        ctx.schedule = None;
        nb
    };
    let (result, schedule) = match ctx.partition {
        None => (gather(&neighbors, ctx.cloud, &mut ctx.counters)?, None),
        Some(p) => {
            let bg = block_gather(p, &neighbors, ctx.cloud, &mut ctx.counters)?;
            (bg.result, Some(bg.schedule))
        }
    };
    if let Some(oracle) = ctx.oracle.as_mut() {
        let reference = gather(&neighbors, ctx.cloud, &mut oracle.counters)?;
        let same = result.bit_identical(&reference);
        oracle.bit_identical = Some(same);
        oracle.check("gather-exactness", true, same, Some("gathered values differ from the direct gather".into()));
    }
    Ok(gather_json(&result, schedule))
}
