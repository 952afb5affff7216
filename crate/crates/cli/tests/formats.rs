use std::path::Path;

use proptest::prelude::*;

use fpo::io::{load_cloud, parse_bin, parse_xyz, save_cloud, write_bin, write_xyz, Format};
use fpo_core::PointCloud;

fn f32_value() -> impl Strategy<Value = f64> {
    any::<f32>().prop_filter("finite", |v| v.is_finite()).prop_map(f64::from)
}

fn cloud() -> impl Strategy<Value = PointCloud> {
    (1usize..40, 0usize..5).prop_flat_map(|(n, c)| {
        (
            proptest::collection::vec([f32_value(), f32_value(), f32_value()], n),
            proptest::collection::vec(f32_value(), n * c),
        )
            .prop_map(move |(coords, feats)| PointCloud::with_features(coords, feats, c).unwrap())
    })
}

fn bits(c: &PointCloud) -> (Vec<u64>, Vec<u64>) {
    (
        c.coords().iter().flatten().map(|v| v.to_bits()).collect(),
        c.features().iter().map(|v| v.to_bits()).collect(),
    )
}

proptest! {
    #[test]
    fn binary_round_trip_is_bit_exact(c in cloud()) {
        let back = parse_bin(&write_bin(&c), Path::new("mem")).unwrap();
        prop_assert_eq!(back.feature_width(), c.feature_width());
        prop_assert_eq!(bits(&back), bits(&c));
    }

    #[test]
    fn text_round_trip_is_exact(c in cloud()) {
        let back = parse_xyz(&write_xyz(&c), Path::new("mem")).unwrap();
        prop_assert_eq!(back.feature_width(), c.feature_width());
        prop_assert_eq!(bits(&back), bits(&c));
    }

    #[test]
    fn truncated_binary_is_rejected(c in cloud(), cut in 1usize..16) {
        let bytes = write_bin(&c);
        let short = &bytes[..bytes.len().saturating_sub(cut)];
        prop_assert!(parse_bin(short, Path::new("mem")).is_err());
    }
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let c = PointCloud::with_features(vec![[0.5, -1.25, 3.0], [0.125, 2.0, 0.0]], vec![1.0, 2.0, 3.0, 4.0], 2).unwrap();
    for (name, format) in [("a.fpc", Format::BinF32), ("a.xyz", Format::XyzText)] {
        let path = dir.path().join(name);
        save_cloud(&c, &path, format).unwrap();
        assert_eq!(Format::from_path(&path), format);
        assert_eq!(load_cloud(&path, format).unwrap(), c);
    }
}
