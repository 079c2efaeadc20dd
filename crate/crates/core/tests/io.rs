mod common;

use common::Mat;
use proptest::prelude::*;
use soprbt::io::{self, MassKind, Storage, SystemMeta};
use soprbt::linalg;
use soprbt::pipeline::{reduce_second_order, PipelineConfig};
use soprbt::so_model::{generate_triple_chain, TripleChainParams};

#[test]
fn coordinate_general_by_hand() {
    let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 3 2.5\n2 1 -1\n";
    let a = io::parse_mtx(text).unwrap();
    assert_eq!(
        a,
        Mat::from_row_slice(2, 3, &[0.0, 0.0, 2.5, -1.0, 0.0, 0.0])
    );
}

#[test]
fn symmetric_and_skew_storage_mirror() {
    let sym =
        io::parse_mtx("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 3\n")
            .unwrap();
    assert_eq!(sym, Mat::from_row_slice(2, 2, &[4.0, 3.0, 3.0, 0.0]));
    let skew =
        io::parse_mtx("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n")
            .unwrap();
    assert_eq!(skew, Mat::from_row_slice(2, 2, &[0.0, -3.0, 3.0, 0.0]));
}

#[test]
fn array_format_is_column_major() {
    let a = io::parse_mtx("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
    assert_eq!(a, Mat::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]));
    let s = io::parse_mtx("%%MatrixMarket matrix array integer symmetric\n2 2\n1\n2\n3\n").unwrap();
    assert_eq!(s, Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
}

#[test]
fn malformed_input_is_rejected() {
    for text in [
        "",
        "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n",
        "%%MatrixMarket matrix coordinate real symmetric\n2 3 0\n",
        "%%MatrixMarket matrix array real general\n1 1\n1\n2\n",
    ] {
        assert!(io::parse_mtx(text).is_err(), "{text:?}");
    }
}

#[test]
fn symmetric_writer_keeps_lower_triangle() {
    let a = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 0.0]);
    let text = io::format_mtx(&a, Storage::Symmetric);
    assert_eq!(
        text,
        "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1e0\n2 1 2e0\n"
    );
    assert_eq!(io::parse_mtx(&text).unwrap(), a);
}

#[test]
fn system_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let params = TripleChainParams::default();
    let sys = generate_triple_chain(3, &params).unwrap();
    let meta = SystemMeta {
        n: sys.n(),
        m: sys.inputs(),
        mass: MassKind::Matrix,
        triple_chain: Some(io::system::TripleChainMeta {
            n_per_row: 3,
            params,
        }),
        reduced_from: None,
    };
    io::write_system(dir.path(), &sys, &meta).unwrap();
    let loaded = io::read_system(dir.path()).unwrap();
    assert_eq!(loaded.sys.m, sys.m);
    assert_eq!(loaded.sys.d, sys.d);
    assert_eq!(loaded.sys.k, sys.k);
    assert_eq!(loaded.sys.b, sys.b);
    assert_eq!(loaded.meta.unwrap(), meta);
    assert_eq!(loaded.asymmetry, 0.0);
}

#[test]
fn reduced_directory_has_identity_mass() {
    let dir = tempfile::tempdir().unwrap();
    let sys = common::random_system(4, 1, 2);
    let out = reduce_second_order(
        &sys,
        &PipelineConfig {
            target_r: Some(3),
            ..Default::default()
        },
    )
    .unwrap();
    io::write_reduced(dir.path(), &out.recovery.result, Some("input")).unwrap();
    assert!(!dir.path().join("M.mtx").exists());
    let g = io::read_mtx(&dir.path().join("G.mtx")).unwrap();
    let loaded = io::read_system(dir.path()).unwrap();
    let r = out.recovery.final_r;
    assert_eq!(loaded.sys.m, Mat::identity(r, r));
    assert!((&g * g.transpose() - &loaded.sys.k).amax() <= 1e-12 * loaded.sys.k.amax());
    assert_eq!(loaded.meta.unwrap().reduced_from.as_deref(), Some("input"));
}

#[test]
fn asymmetric_input_is_symmetrized_and_measured() {
    let dir = tempfile::tempdir().unwrap();
    let sys = common::random_system(3, 1, 4);
    let meta = SystemMeta {
        n: 3,
        m: 1,
        mass: MassKind::Matrix,
        triple_chain: None,
        reduced_from: None,
    };
    io::write_system(dir.path(), &sys, &meta).unwrap();
    let mut k = sys.k.clone();
    k[(0, 1)] += 1e-3;
    io::write_mtx(&dir.path().join("K.mtx"), &k, Storage::General).unwrap();
    let loaded = io::read_system(dir.path()).unwrap();
    assert!((loaded.asymmetry - 1e-3 * 2f64.sqrt()).abs() <= 1e-12);
    assert_eq!(loaded.sys.k, linalg::sym(&k));
}

#[test]
fn meta_mismatch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let sys = common::random_system(3, 1, 4);
    let meta = SystemMeta {
        n: 4,
        m: 1,
        mass: MassKind::Matrix,
        triple_chain: None,
        reduced_from: None,
    };
    io::write_system(dir.path(), &sys, &meta).unwrap();
    assert!(io::read_system(dir.path()).is_err());
    assert!(io::read_system(&dir.path().join("missing")).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn general_storage_round_trips_exactly(
        rows in 1usize..6,
        cols in 1usize..6,
        vals in prop::collection::vec(prop_oneof![Just(0.0), any::<f64>().prop_filter("finite", |x| x.is_finite())], 36),
    ) {
        let a = Mat::from_fn(rows, cols, |i, j| vals[i * 6 + j]);
        let text = io::format_mtx(&a, Storage::General);
        prop_assert_eq!(io::parse_mtx(&text).unwrap(), a);
        // deterministic text
        prop_assert_eq!(io::format_mtx(&io::parse_mtx(&text).unwrap(), Storage::General), text);
    }

    #[test]
    fn symmetric_storage_round_trips(n in 1usize..6, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = linalg::sym(&common::randn(&mut rng, n, n));
        let back = io::parse_mtx(&io::format_mtx(&a, Storage::Symmetric)).unwrap();
        prop_assert_eq!(back, a);
    }
}
