mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::Mat;
use serde_json::Value;
use soprbt::io;
use soprbt::pipeline::{reduce_second_order, PipelineConfig};
use soprbt::recovery::{self, Transform};
use soprbt::so_model::{generate_triple_chain, TripleChainParams};

fn soprbt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soprbt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, n: usize) {
    let out = soprbt(&[
        "generate",
        "--n-per-row",
        &n.to_string(),
        "--out",
        path(dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn generate_single_row_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), 1);
    let loaded = io::read_system(tmp.path()).unwrap();
    let sys = generate_triple_chain(1, &TripleChainParams::default()).unwrap();
    assert_eq!(loaded.sys.k, sys.k);
    assert_eq!(loaded.sys.m, sys.m);
    assert_eq!(loaded.sys.d, sys.d);
}

#[test]
fn generate_full_size_records_dimension() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), 500);
    let meta = json(&tmp.path().join("meta.json"));
    assert_eq!(meta["n"], 1501);
    assert_eq!(meta["triple_chain"]["n_per_row"], 500);
}

#[test]
fn generate_is_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    generate(&a, 4);
    generate(&b, 4);
    for f in ["M.mtx", "D.mtx", "K.mtx", "B.mtx", "meta.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn generate_rejects_bad_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let out = soprbt(&["generate", "--n-per-row", "0", "--out", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = soprbt(&["generate", "--k1", "-1", "--out", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reduce_writes_model_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, red) = (tmp.path().join("chain"), tmp.path().join("red"));
    generate(&input, 10);
    let out = soprbt(&[
        "reduce",
        "--input",
        path(&input),
        "--out",
        path(&red),
        "--target-r",
        "12",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "D.mtx",
        "K.mtx",
        "B.mtx",
        "G.mtx",
        "meta.json",
        "report.json",
        "spectrum.csv",
    ] {
        assert!(red.join(f).exists(), "{f}");
    }
    let report = json(&red.join("report.json"));
    assert_eq!(report["plan"]["r"], 12);
    assert!(report["error_bound"].as_f64().unwrap() > 0.0);
    assert!(
        report["reduced_model"]["d_negative_count"]
            .as_u64()
            .unwrap()
            <= 1
    );
    assert!(report["verification"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
    assert!(report.get("timings").is_none() && report.get("transforms").is_none());
    let reduced = io::read_system(&red).unwrap();
    assert_eq!(
        reduced.sys.n(),
        report["reduced_model"]["r"].as_u64().unwrap() as usize
    );
}

#[test]
fn reduce_output_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("chain");
    generate(&input, 3);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = soprbt(&[
            "reduce",
            "--input",
            path(&input),
            "--out",
            path(dir),
            "--target-r",
            "6",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for f in ["report.json", "spectrum.csv", "D.mtx", "K.mtx"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn infeasible_order_is_a_planning_error() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("chain");
    generate(&input, 2);
    let out = soprbt(&[
        "reduce",
        "--input",
        path(&input),
        "--out",
        path(&tmp.path().join("red")),
        "--target-r",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("planning"));
}

#[test]
fn bad_options_are_validation_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("chain");
    generate(&input, 2);
    let red = tmp.path().join("red");
    for extra in [
        ["--omega-lo", "1000"],
        ["--points", "1"],
        ["--cluster-tol", "-1"],
        ["--target-r", "0"],
    ] {
        let mut args = vec!["reduce", "--input", path(&input), "--out", path(&red)];
        args.extend(extra);
        assert_eq!(soprbt(&args).status.code(), Some(2), "{extra:?}");
    }
    let missing = soprbt(&[
        "reduce",
        "--input",
        path(&tmp.path().join("none")),
        "--out",
        path(&red),
    ]);
    assert_eq!(missing.status.code(), Some(6));
}

fn matrix(v: &Value) -> Mat {
    serde_json::from_value(v.clone()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

/// The logged transforms, read back from JSON and replayed on the reduced
/// first-order model, reproduce the written damping matrix.
#[test]
fn emitted_transforms_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, red) = (tmp.path().join("chain"), tmp.path().join("red"));
    generate(&input, 4);
    let out = soprbt(&[
        "reduce",
        "--input",
        path(&input),
        "--out",
        path(&red),
        "--target-r",
        "8",
        "--emit-transforms",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&red.join("report.json"));
    let steps: Vec<Transform> = report["transforms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| match s["type"].as_str().unwrap() {
            "similarity" => Transform::Similarity {
                label: s["label"].as_str().unwrap().into(),
                t: matrix(&s["t"]),
            },
            "pad" => Transform::Pad {
                plus: floats(&s["plus"]),
                minus: floats(&s["minus"]),
            },
            other => panic!("unknown step {other}"),
        })
        .collect();
    let sys = io::read_system(&input).unwrap().sys;
    let lib = reduce_second_order(
        &sys,
        &PipelineConfig {
            target_r: Some(8),
            ..Default::default()
        },
    )
    .unwrap();
    let (af, _) = recovery::replay(&lib.reduced.sys.a, &lib.reduced.sys.b, &steps).unwrap();
    let r = lib.recovery.final_r;
    let d = -soprbt::linalg::sym(&soprbt::linalg::block(&af, r, r, r, r));
    let written = io::read_system(&red).unwrap().sys.d;
    assert!((&d - &written).amax() <= 1e-10 * written.amax());
}

#[test]
fn analyze_identical_systems() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, res) = (tmp.path().join("chain"), tmp.path().join("res"));
    generate(&input, 3);
    let out = soprbt(&[
        "analyze",
        "--original",
        path(&input),
        "--reduced",
        path(&input),
        "--out",
        path(&res),
        "--points",
        "50",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = json(&res.join("summary.json"));
    assert!(summary["max_abs_error"].as_f64().unwrap() <= 1e-12);
    assert_eq!(summary["points"], 50);
    let csv = std::fs::read_to_string(res.join("frequency.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn analyze_reports_reduction_error_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, red) = (tmp.path().join("chain"), tmp.path().join("red"));
    generate(&input, 3);
    assert!(soprbt(&[
        "reduce",
        "--input",
        path(&input),
        "--out",
        path(&red),
        "--target-r",
        "4"
    ])
    .status
    .success());
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let res = tmp.path().join(name);
        let out = soprbt(&[
            "analyze",
            "--original",
            path(&input),
            "--reduced",
            path(&red),
            "--out",
            path(&res),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push((
            std::fs::read(res.join("frequency.csv")).unwrap(),
            std::fs::read(res.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let summary = json(&tmp.path().join("a").join("summary.json"));
    let bound = summary["error_bound"].as_f64().unwrap();
    assert!(summary["max_abs_error"].as_f64().unwrap() > 0.0 && bound > 0.0);
}

#[test]
fn analyze_rejects_bad_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("chain");
    generate(&input, 1);
    let res = tmp.path().join("res");
    let out = soprbt(&[
        "analyze",
        "--original",
        path(&input),
        "--reduced",
        path(&input),
        "--out",
        path(&res),
        "--omega-hi",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
