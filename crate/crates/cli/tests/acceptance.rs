//! Acceptance suite. Runs every criterion at its stated size and time budget
//! and prints one PASS/FAIL line each; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::RngExt;
use proptest::test_runner::{RngAlgorithm, TestRng};

use fpo::bench::{run_suite, Suite, SuiteConfig};
use fpo::report::real;
use fpo_core::geometry::distance;
use fpo_core::partition::{
    fractal_partition, kdtree_partition, octree_partition, uniform_partition, Method, Partition, SearchSpaceKind,
};
use fpo_core::pointops::{
    block_ball_query, block_fps, block_gather, block_knn, fps_window_check, gather, global_ball_query, global_fps,
    global_knn, BallQuery, BlockSeed, Centers, NeighborResult, Query,
};
use fpo_core::schedule::{fps_block_cost, schedule_fps, schedule_neighbor, ScheduleConfig};
use fpo_core::synth::{generate, SynthKind, SynthSpec};
use fpo_core::{CostCounters, PointCloud};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn rng(stream: u64) -> TestRng {
    let mut base = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    for _ in 0..stream {
        base.random_range(0..u64::MAX);
    }
    base
}

fn cloud(kind: &str, n: usize, seed: u64, features: usize) -> PointCloud {
    generate(&SynthSpec {
        kind: SynthKind::from_name(kind).unwrap(),
        n,
        seed,
        feature_width: features,
    })
    .unwrap()
    .cloud
}

fn random_partition(rng: &mut TestRng, method: Method, cloud: &PointCloud, counters: &mut CostCounters) -> Partition {
    let th = rng.random_range(1..=600usize);
    let start = rng.random_range(0..3usize);
    match method {
        Method::Fractal => fractal_partition(cloud, th, start, counters),
        Method::KdTree => kdtree_partition(cloud, th, start, counters),
        Method::Uniform => {
            let cells = [0; 3].map(|_| rng.random_range(1..=9usize));
            uniform_partition(cloud, cells, counters)
        }
        Method::Octree => octree_partition(cloud, th, 12, counters),
    }
    .unwrap()
}

/// Sorted `(distance, index)` of every candidate.
fn ranked(cloud: &PointCloud, center: usize, candidates: &[usize]) -> Vec<(f64, usize)> {
    let c = cloud.point(center);
    let mut all: Vec<(f64, usize)> = candidates.iter().map(|&j| (distance(c, cloud.point(j)), j)).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all
}

// 1 ---------------------------------------------------------------------

fn partition_exactness() -> Outcome {
    let mut rng = rng(1);
    let mut partitions = 0;
    for i in 0..200u64 {
        let kind = SynthKind::NAMES[i as usize % 5];
        let n = rng.random_range(1..=10_000usize);
        let cloud = cloud(kind, n, i, 0);
        for method in Method::ALL {
            let mut counters = CostCounters::new();
            let p = random_partition(&mut rng, method, &cloud, &mut counters);
            let mut seen = vec![false; n];
            for b in p.blocks() {
                let members = p.block_indices(b.id);
                ensure!(!members.is_empty(), "{kind} n={n} {}: empty block {}", method.name(), b.id);
                for &j in members {
                    ensure!(!seen[j], "{kind} n={n} {}: point {j} in two blocks", method.name());
                    seen[j] = true;
                }
                ensure!(
                    b.degenerate_stop || members.len() <= p.limit(),
                    "{kind} n={n} {}: block of {} exceeds {}",
                    method.name(),
                    members.len(),
                    p.limit()
                );
            }
            ensure!(seen.iter().all(|&s| s), "{kind} n={n} {}: a point is in no block", method.name());
            partitions += 1;
        }
    }
    Ok(format!("{partitions} partitions exact"))
}

// 2 ---------------------------------------------------------------------

fn coord_range(cloud: &PointCloud, idx: &[usize], dim: usize) -> (f64, f64) {
    idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| {
        let v = cloud.point(j)[dim];
        (lo.min(v), hi.max(v))
    })
}

fn midpoint_splits(cloud: &PointCloud, idx: &[usize], dim: usize) -> bool {
    let (lo, hi) = coord_range(cloud, idx, dim);
    let mid = 0.5 * lo + 0.5 * hi;
    let left = idx.iter().filter(|&&j| cloud.point(j)[dim] < mid).count();
    left > 0 && left < idx.len()
}

fn fractal_structure() -> Outcome {
    let mut rng = rng(2);
    let mut internal = 0;
    let mut retried = 0;
    for t in 0..50u64 {
        let kind = SynthKind::NAMES[t as usize % 5];
        let n = rng.random_range(2..=6000usize);
        let th = rng.random_range(1..=400usize);
        let start = rng.random_range(0..3usize);
        let cloud = cloud(kind, n, 100 + t, 0);
        let p = fractal_partition(&cloud, th, start, &mut CostCounters::new()).unwrap();
        for (id, node) in p.nodes().iter().enumerate() {
            let idx = p.node_indices(id);
            let Some(split) = node.split else {
                if node.degenerate_stop {
                    ensure!(idx.len() > th, "degenerate leaf within threshold");
                    ensure!((0..3).all(|d| !midpoint_splits(&cloud, idx, d)), "degenerate leaf is splittable");
                } else {
                    ensure!(idx.len() <= th, "leaf of {} above th {th}", idx.len());
                }
                continue;
            };
            internal += 1;
            let r = split.retries as usize;
            ensure!(
                split.dim == (start + node.depth + r) % 3,
                "node at depth {} splits dim {} (start {start}, retries {r})",
                node.depth,
                split.dim
            );
            for j in 0..r {
                ensure!(
                    !midpoint_splits(&cloud, idx, (start + node.depth + j) % 3),
                    "retry skipped a splittable dimension"
                );
            }
            retried += usize::from(r > 0);
            let (lo, hi) = coord_range(&cloud, idx, split.dim);
            ensure!(split.value == 0.5 * lo + 0.5 * hi, "split value is not the min-max midpoint");
            let [l, rr] = node.children[..] else {
                return Err("internal node without two children".into());
            };
            let (left, right) = (p.node(l), p.node(rr));
            ensure!(
                left.range.start == node.range.start && left.range.end == right.range.start && right.range.end == node.range.end,
                "children do not tile the parent range"
            );
            ensure!(
                p.node_indices(l).iter().all(|&j| cloud.point(j)[split.dim] < split.value)
                    && p.node_indices(rr).iter().all(|&j| cloud.point(j)[split.dim] >= split.value),
                "a point is on the wrong side of its split"
            );
        }
    }
    Ok(format!("{internal} internal nodes rescanned, {retried} with dimension retries"))
}

// 3 ---------------------------------------------------------------------

fn traversal_vs_sorts() -> Outcome {
    let cloud = cloud("uniform-cube", 289 * 1024, 3, 0);
    let mut fc = CostCounters::new();
    fractal_partition(&cloud, 256, 0, &mut fc).unwrap();
    let mut kc = CostCounters::new();
    kdtree_partition(&cloud, 256, 0, &mut kc).unwrap();
    ensure!(fc.traversal_rounds <= 12, "fractal traversal_rounds {}", fc.traversal_rounds);
    ensure!(kc.sort_invocations == 2047, "kdtree sort_invocations {}", kc.sort_invocations);
    Ok(format!(
        "fractal traversal_rounds {}, kdtree sort_invocations {}",
        fc.traversal_rounds, kc.sort_invocations
    ))
}

// 4 ---------------------------------------------------------------------

fn skip_equivalence() -> Outcome {
    let mut rng = rng(4);
    for t in 0..100u64 {
        let kind = SynthKind::NAMES[t as usize % 5];
        let n = rng.random_range(1..=2500usize);
        let m = rng.random_range(1..=n);
        let seed = rng.random_range(0..n);
        let cloud = cloud(kind, n, 400 + t, 0);
        let mut naive_c = CostCounters::new();
        let mut skip_c = CostCounters::new();
        let naive = global_fps(&cloud, m, seed, &mut naive_c).unwrap();
        let skip = fps_window_check(&cloud, m, seed, &mut skip_c).unwrap();
        ensure!(naive.indices == skip.indices, "{kind} n={n} m={m} seed={seed}: samples differ");
        let expected: u64 = (0..m as u64).map(|i| n as u64 - i).sum();
        ensure!(
            skip_c.distance_ops == expected,
            "{kind} n={n} m={m}: {} distance ops, expected {expected}",
            skip_c.distance_ops
        );
    }
    Ok("100 triples identical, distance_ops = sum(n - i)".into())
}

// 5 ---------------------------------------------------------------------

fn same_rows(block: &NeighborResult, global: &NeighborResult) -> bool {
    block.entries.len() == global.entries.len()
        && block.entries.iter().zip(&global.entries).all(|(b, g)| {
            b.center == g.center
                && b.found == g.found
                && b.distances.iter().map(|d| d.to_bits()).eq(g.distances.iter().map(|d| d.to_bits()))
        })
}

fn single_block_equivalence() -> Outcome {
    let mut rng = rng(5);
    for t in 0..50u64 {
        let kind = SynthKind::NAMES[t as usize % 5];
        let n = rng.random_range(2..=1500usize);
        let cloud = cloud(kind, n, 500 + t, 3);
        let method = Method::ALL[t as usize % 4];
        let mut pc = CostCounters::new();
        let p = match method {
            Method::Fractal => fractal_partition(&cloud, n, 0, &mut pc),
            Method::KdTree => kdtree_partition(&cloud, n, 1, &mut pc),
            Method::Uniform => uniform_partition(&cloud, [1; 3], &mut pc),
            Method::Octree => octree_partition(&cloud, n, 8, &mut pc),
        }
        .unwrap();
        ensure!(p.num_blocks() == 1, "{} produced {} blocks", method.name(), p.num_blocks());

        let m = rng.random_range(1..=n);
        let seed = p.block_indices(0)[0];
        let bs = block_fps(&cloud, &p, m as f64 / n as f64, m, BlockSeed::First, &mut CostCounters::new()).unwrap();
        let gs = global_fps(&cloud, m, seed, &mut CostCounters::new()).unwrap();
        ensure!(bs.indices == gs.indices, "{} n={n} m={m}: block FPS differs", method.name());

        let centers = gs.indices.clone();
        let per_block = Centers::PerBlock(vec![centers.clone()]);
        let ball = BallQuery::new(rng.random_range(0.02..0.4), rng.random_range(1..=40usize));
        let bb = block_ball_query(&cloud, &p, &per_block, &ball, &mut CostCounters::new()).unwrap();
        let gb = global_ball_query(&cloud, &centers, &ball, &mut CostCounters::new()).unwrap();
        ensure!(same_rows(&bb, &gb), "{} n={n}: block ball query differs", method.name());

        let k = rng.random_range(1..=12usize);
        let bk = block_knn(&cloud, &p, &per_block, k, &mut CostCounters::new()).unwrap();
        let gk = global_knn(&cloud, &centers, k, &mut CostCounters::new()).unwrap();
        ensure!(same_rows(&bk, &gk), "{} n={n}: block KNN differs", method.name());

        let bg = block_gather(&p, &bb, &cloud, &mut CostCounters::new()).unwrap();
        let gg = gather(&gb, &cloud, &mut CostCounters::new()).unwrap();
        ensure!(bg.result.bit_identical(&gg), "{} n={n}: block gather differs", method.name());
    }
    Ok("FPS, ball query, KNN and gather bit-identical on 50 single-block clouds".into())
}

// 6 ---------------------------------------------------------------------

/// Reference gather: copy each neighbor's features, pad ball-query rows to
/// `num` slots with the first neighbor, or zeros if there is none.
fn reference_rows(nb: &NeighborResult, cloud: &PointCloud) -> Vec<Vec<f64>> {
    let c = cloud.feature_width();
    nb.entries
        .iter()
        .map(|e| {
            let slots = match nb.query {
                Query::Ball { num, .. } => num,
                Query::Knn { .. } => e.found.len(),
            };
            (0..slots)
                .flat_map(|s| match e.found.get(s).or(e.found.first()) {
                    Some(&j) => cloud.feature(j).to_vec(),
                    None => vec![0.0; c],
                })
                .collect()
        })
        .collect()
}

fn gather_exactness() -> Outcome {
    let mut rng = rng(6);
    let mut padded = 0;
    let mut rows = 0;
    for t in 0..50u64 {
        let kind = SynthKind::NAMES[t as usize % 5];
        let n = rng.random_range(50..=3000usize);
        let c = rng.random_range(1..=6usize);
        let cloud = cloud(kind, n, 600 + t, c);
        let method = Method::ALL[t as usize % 4];
        let p = random_partition(&mut rng, method, &cloud, &mut CostCounters::new());
        let m = rng.random_range(1..=n / 4);
        let sample = block_fps(&cloud, &p, m as f64 / n as f64, m, BlockSeed::First, &mut CostCounters::new()).unwrap();
        let centers = Centers::from_samples(&p, &sample);
        let ball = BallQuery::new(rng.random_range(0.01..0.3), rng.random_range(1..=48usize));
        let nb = block_ball_query(&cloud, &p, &centers, &ball, &mut CostCounters::new()).unwrap();
        let bg = block_gather(&p, &nb, &cloud, &mut CostCounters::new()).unwrap();
        let direct = gather(&nb, &cloud, &mut CostCounters::new()).unwrap();
        ensure!(bg.result.bit_identical(&direct), "case {t}: block gather differs from direct gather");
        let expected = reference_rows(&nb, &cloud);
        for (row, want) in bg.result.rows.iter().zip(&expected) {
            ensure!(
                row.values.iter().map(|v| v.to_bits()).eq(want.iter().map(|v| v.to_bits())),
                "case {t}: center {} differs from the reference copy",
                row.center
            );
            padded += usize::from(row.padded);
            rows += 1;
        }
    }
    ensure!(padded > 0, "no padded rows were exercised");
    Ok(format!("{rows} rows bit-equal, {padded} padded"))
}

// 7 ---------------------------------------------------------------------

fn knn_within_space() -> Outcome {
    let mut rng = rng(7);
    let mut checked = 0;
    for t in 0..20u64 {
        let kind = SynthKind::NAMES[t as usize % 5];
        let n = rng.random_range(1..=2048usize);
        let cloud = cloud(kind, n, 700 + t, 0);
        let method = Method::ALL[t as usize % 4];
        let p = random_partition(&mut rng, method, &cloud, &mut CostCounters::new());
        let k = rng.random_range(1..=16usize);
        let res = block_knn(&cloud, &p, &Centers::AllPoints, k, &mut CostCounters::new()).unwrap();
        for e in &res.entries {
            let space = p.search_space(e.block.unwrap()).unwrap();
            let mut want = ranked(&cloud, e.center, space.indices);
            want.truncate(k);
            ensure!(
                want.iter().map(|w| w.1).eq(e.found.iter().copied())
                    && want.iter().map(|w| w.0.to_bits()).eq(e.distances.iter().map(|d| d.to_bits())),
                "{} n={n} k={k}: center {} is not the K nearest of its space",
                method.name(),
                e.center
            );
            checked += 1;
        }
    }
    Ok(format!("{checked} centers match brute force over their search space"))
}

// 8 ---------------------------------------------------------------------

/// Four clusters in the quadrants of the unit xy-square: 19, 24, 20 and 17
/// points with contiguous original indices, so fractal splits x then y.
fn four_leaf_cloud() -> PointCloud {
    let blocks = [(19, 0.0, 0.0), (24, 0.0, 0.6), (20, 0.6, 0.0), (17, 0.6, 0.6)];
    let mut coords = Vec::new();
    for (k, x0, y0) in blocks {
        for j in 0..k {
            let t = j as f64 / (k - 1) as f64;
            let u = ((7 * j) % k) as f64 / (k - 1) as f64;
            coords.push([x0 + 0.4 * t, y0 + 0.4 * u, j as f64 / k as f64]);
        }
    }
    PointCloud::new(coords).unwrap()
}

fn set(idx: &[usize]) -> BTreeSet<usize> {
    idx.iter().copied().collect()
}

fn search_space_rule() -> Outcome {
    let cloud = four_leaf_cloud();
    let span = |a: usize, b: usize| (a..b).collect::<BTreeSet<usize>>();

    let p = fractal_partition(&cloud, 24, 0, &mut CostCounters::new()).unwrap();
    ensure!(p.block_sizes() == [19, 24, 20, 17], "th=24 leaves {:?}", p.block_sizes());
    let expected = [span(0, 43), span(0, 43), span(43, 80), span(43, 80)];
    for (b, want) in expected.iter().enumerate() {
        let s = p.search_space(b).unwrap();
        ensure!(s.kind == SearchSpaceKind::LeafParent, "block {b} kind {:?}", s.kind);
        ensure!(set(s.indices) == *want, "block {b} space is not its parent subtree");
    }

    let p = fractal_partition(&cloud, 40, 0, &mut CostCounters::new()).unwrap();
    ensure!(p.block_sizes() == [19, 24, 37], "th=40 leaves {:?}", p.block_sizes());
    let s = p.search_space(2).unwrap();
    ensure!(s.kind == SearchSpaceKind::Leaf, "depth-1 leaf kind {:?}", s.kind);
    ensure!(set(s.indices) == span(43, 80), "depth-1 leaf space is not its own points");
    for b in 0..2 {
        ensure!(set(p.search_space(b).unwrap().indices) == span(0, 43), "block {b} space");
    }

    let p = fractal_partition(&cloud, 80, 0, &mut CostCounters::new()).unwrap();
    let s = p.search_space(0).unwrap();
    ensure!(s.kind == SearchSpaceKind::WholeCloud && set(s.indices) == span(0, 80), "root leaf space");
    Ok("parent subtrees at depth 2, own points at depth 1, whole cloud at the root".into())
}

// 9 ---------------------------------------------------------------------

fn reuse_and_makespan() -> Outcome {
    let cloud = four_leaf_cloud();
    let p = fractal_partition(&cloud, 24, 0, &mut CostCounters::new()).unwrap();
    for k in 1..=17usize {
        let r = schedule_neighbor(&p, &[k; 4], &ScheduleConfig::new(4)).unwrap();
        ensure!(r.reuse_factor == k as f64, "k={k}: reuse_factor {}", r.reuse_factor);
        ensure!(r.loads_without_reuse == (k * (43 + 43 + 37 + 37)) as u64, "k={k}: loads without reuse");
    }

    let mut rng = rng(9);
    for t in 0..50 {
        let blocks = rng.random_range(1..=40usize);
        let sizes: Vec<usize> = (0..blocks).map(|_| rng.random_range(1..=300usize)).collect();
        let quotas: Vec<usize> = sizes.iter().map(|&s| rng.random_range(0..=s)).collect();
        let total: f64 = sizes
            .iter()
            .zip(&quotas)
            .map(|(&s, &q)| fps_block_cost(s, q, &ScheduleConfig::new(1)))
            .sum();
        let mut prev = f64::INFINITY;
        for units in 1..=20 {
            let span = schedule_fps(&sizes, &quotas, &ScheduleConfig::new(units)).unwrap().makespan;
            ensure!(span <= prev, "instance {t}: makespan rises from {prev} to {span} at P={units}");
            ensure!(span >= total / units as f64, "instance {t}: makespan {span} below sum/P at P={units}");
            if units == 1 {
                ensure!(span == total, "instance {t}: makespan(1) {span} != sum {total}");
            }
            prev = span;
        }
    }
    Ok("reuse_factor = k for k in 1..=17; 50 instances monotone and bounded".into())
}

// 10 --------------------------------------------------------------------

fn threshold_trend() -> Outcome {
    let config = SuiteConfig {
        suite: Suite::Threshold,
        kind: "uniform-cube".into(),
        seed: 10,
        sizes: vec![33 * 1024],
        thresholds: vec![4096, 1024, 256, 64, 16, 8],
        methods: vec!["fractal".into()],
        rate: real(0.25),
        radius: real(0.1),
        num: 32,
        k: 3,
        units: 4,
        centers: "global-sample".into(),
    };
    let report = run_suite(&config).map_err(|e| e.to_string())?;
    let ops: Vec<u64> = report.runs.iter().map(|r| r.point_op_distance_ops).collect();
    let recall: Vec<f64> = report
        .runs
        .iter()
        .map(|r| r.quality.as_ref().unwrap().knn_recall.parse().unwrap())
        .collect();
    ensure!(ops.windows(2).all(|w| w[1] < w[0]), "distance_ops not strictly decreasing: {ops:?}");
    ensure!(recall.windows(2).all(|w| w[1] <= w[0]), "KNN recall rises: {recall:?}");
    Ok(format!("distance_ops {ops:?}, knn recall {recall:.4?}"))
}

// 11 --------------------------------------------------------------------

fn fpo(dir: &Path, seed: &str, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fpo"))
        .args(args)
        .current_dir(dir)
        .env("FPO_SEED", seed)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "fpo {} failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(out.stdout)
}

fn without_timing(bytes: &[u8]) -> Result<String, String> {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timing");
    }
    Ok(v.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let commands: &[&[&str]] = &[
        &["gen", "--kind", "with-outliers", "--n", "3000", "--features", "4", "--out", "c.fpc"],
        &["partition", "--input", "c.fpc", "--method", "fractal", "--th", "64", "--json", "p.json"],
        &["partition", "--input", "c.fpc", "--method", "kdtree", "--bs", "64"],
        &["partition", "--input", "c.fpc", "--method", "uniform", "--cells", "3,2,4"],
        &["partition", "--input", "c.fpc", "--method", "octree", "--th", "64"],
        &["ops", "--input", "c.fpc", "--op", "fps", "--mode", "global", "--m", "64", "--verify-oracle"],
        &["ops", "--input", "c.fpc", "--op", "fps", "--mode", "block", "--partition", "p.json", "--verify-oracle"],
        &["ops", "--input", "c.fpc", "--op", "bq", "--mode", "block", "--method", "fractal", "--th", "64", "--r", "0.1", "--num", "32", "--verify-oracle"],
        &["ops", "--input", "c.fpc", "--op", "knn", "--mode", "block", "--partition", "p.json", "--verify-oracle"],
        &["ops", "--input", "c.fpc", "--op", "gather", "--mode", "block", "--partition", "p.json", "--verify-oracle"],
        &["bench", "--suite", "threshold", "--n", "2048", "--ths", "256,64,16"],
        &["bench", "--suite", "scaling", "--sizes", "1024,4096"],
        &["bench", "--suite", "ablation", "--n", "2048"],
    ];
    for args in commands {
        let first = fpo(d, "42", args)?;
        let cloud_a = std::fs::read(d.join("c.fpc")).map_err(|e| e.to_string())?;
        let second = fpo(d, "42", args)?;
        let cloud_b = std::fs::read(d.join("c.fpc")).map_err(|e| e.to_string())?;
        ensure!(cloud_a == cloud_b, "{}: cloud file changed between runs", args.join(" "));
        if args[0] == "bench" {
            ensure!(without_timing(&first)? == without_timing(&second)?, "{}: output differs", args.join(" "));
        } else {
            ensure!(first == second, "{}: output differs", args.join(" "));
        }
        if args.contains(&"--json") {
            let a = std::fs::read(d.join(args.last().unwrap())).map_err(|e| e.to_string())?;
            let b = fpo(d, "42", args).and_then(|_| std::fs::read(d.join(args.last().unwrap())).map_err(|e| e.to_string()))?;
            ensure!(a == b, "{}: report file differs", args.join(" "));
        }
    }
    let other = fpo(d, "43", &["gen", "--kind", "uniform-cube", "--n", "50", "--json", "meta.json"])?;
    let again = fpo(d, "42", &["gen", "--kind", "uniform-cube", "--n", "50", "--json", "meta.json"])?;
    ensure!(other != again, "FPO_SEED did not change the generated cloud");
    Ok(format!("{} commands byte-identical across runs", commands.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("partition exactness", Duration::from_secs(60), partition_exactness),
        ("fractal structural invariants", Duration::from_secs(30), fractal_structure),
        ("traversal vs sort separation", Duration::from_secs(300), traversal_vs_sorts),
        ("skip equivalence", Duration::from_secs(60), skip_equivalence),
        ("degenerate-partition equivalence", Duration::from_secs(60), single_block_equivalence),
        ("gather exactness", Duration::from_secs(30), gather_exactness),
        ("KNN within-space optimality", Duration::from_secs(60), knn_within_space),
        ("search-space rule", Duration::from_secs(60), search_space_rule),
        ("reuse accounting and makespan", Duration::from_secs(60), reuse_and_makespan),
        ("threshold trend", Duration::from_secs(600), threshold_trend),
        ("CLI determinism", Duration::from_secs(600), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *budget => Err(format!("{detail}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({took:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({took:.2?}): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
