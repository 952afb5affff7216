//! Block-wise operations against brute-force global references on a
//! uniform cloud of 4096 points partitioned with th = 256.

use fpo_core::geometry::distance;
use fpo_core::metrics::{fps_dispersion, neighbor_recall};
use fpo_core::partition::{fractal_partition, Partition};
use fpo_core::pointops::{
    block_ball_query, block_fps, block_knn, fps_window_check, global_ball_query, global_knn, BallQuery, BlockSeed,
    Centers,
};
use fpo_core::synth::{generate, SynthKind, SynthSpec};
use fpo_core::{CostCounters, PointCloud};

fn setup() -> (PointCloud, Partition) {
    let cloud = generate(&SynthSpec {
        kind: SynthKind::UniformCube { side: 1.0 },
        n: 4096,
        seed: 11,
        feature_width: 0,
    })
    .unwrap()
    .cloud;
    let partition = fractal_partition(&cloud, 256, 0, &mut CostCounters::new()).unwrap();
    (cloud, partition)
}

fn brute_dispersion(sample: &[usize], cloud: &PointCloud) -> (f64, f64) {
    let mut min_pair = f64::INFINITY;
    for &a in sample {
        for &b in sample {
            if a != b {
                min_pair = min_pair.min(distance(cloud.point(a), cloud.point(b)));
            }
        }
    }
    let mut cover: f64 = 0.0;
    for p in cloud.coords() {
        let nearest = sample.iter().map(|&s| distance(p, cloud.point(s))).fold(f64::INFINITY, f64::min);
        cover = cover.max(nearest);
    }
    (min_pair, cover)
}

#[test]
fn fps_dispersion_ratio_matches_oracle() {
    let (cloud, partition) = setup();
    let block = block_fps(&cloud, &partition, 0.125, 512, BlockSeed::First, &mut CostCounters::new()).unwrap();
    let global = fps_window_check(&cloud, 512, 0, &mut CostCounters::new()).unwrap();
    let b = fps_dispersion(&block.indices, &cloud).unwrap();
    let g = fps_dispersion(&global.indices, &cloud).unwrap();
    assert_eq!((b.min_pairwise, b.coverage_radius), brute_dispersion(&block.indices, &cloud));
    assert_eq!((g.min_pairwise, g.coverage_radius), brute_dispersion(&global.indices, &cloud));
    // Global FPS maximizes spread greedily, so the block sample cannot be
    // twice as spread out.
    let ratio = b.min_pairwise / g.min_pairwise;
    assert!(ratio > 0.0 && ratio <= 2.0, "ratio {ratio}");
}

#[test]
fn ball_query_recall_and_containment() {
    let (cloud, partition) = setup();
    let centers: Vec<usize> = (0..cloud.len()).step_by(8).collect();
    let radius = (3.0 * 16.0 / (4.0 * std::f64::consts::PI * 4096.0)).cbrt();
    let q = BallQuery::new(radius, 32);
    let global = global_ball_query(&cloud, &centers, &q, &mut CostCounters::new()).unwrap();
    let mean = global.entries.iter().map(|e| e.count()).sum::<usize>() as f64 / centers.len() as f64;
    assert!((8.0..=20.0).contains(&mean), "mean global count {mean}");

    let owner = partition.block_of_points();
    let mut per_block = vec![Vec::new(); partition.num_blocks()];
    for &c in &centers {
        per_block[owner[c]].push(c);
    }
    let block = block_ball_query(&cloud, &partition, &Centers::PerBlock(per_block), &q, &mut CostCounters::new()).unwrap();

    let row_of = |c: usize| global.entries.iter().find(|e| e.center == c).unwrap();
    let mut aligned = global.clone();
    aligned.entries = block.entries.iter().map(|e| row_of(e.center).clone()).collect();

    let mut hits = 0.0;
    for (b, g) in block.entries.iter().zip(&aligned.entries) {
        if g.count() < 32 {
            assert!(b.found.iter().all(|i| g.found.contains(i)), "center {}", b.center);
        }
        hits += b.found.iter().filter(|i| g.found.contains(i)).count() as f64 / g.count().max(1) as f64;
    }
    let recall = neighbor_recall(&block, &aligned).unwrap();
    assert_eq!(recall, hits / block.entries.len() as f64);
    assert!((0.0..=1.0).contains(&recall));
}

#[test]
fn restricted_knn_is_never_closer() {
    let (cloud, partition) = setup();
    let block = block_knn(&cloud, &partition, &Centers::AllPoints, 3, &mut CostCounters::new()).unwrap();
    let global = global_knn(&cloud, &block.centers(), 3, &mut CostCounters::new()).unwrap();
    for (b, g) in block.entries.iter().zip(&global.entries) {
        assert_eq!(b.count(), 3);
        for (db, dg) in b.distances.iter().zip(&g.distances) {
            assert!(db >= dg, "center {}", b.center);
        }
    }
    let recall = neighbor_recall(&block, &global).unwrap();
    assert!(recall > 0.5 && recall <= 1.0, "recall {recall}");
}
