mod common;

use common::Mat;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use soprbt::fo_realization::lift;
use soprbt::kyp::{self, KypOptions};
use soprbt::linalg;
use soprbt::prbt::{self, Sign, SignedSpectrum};
use soprbt::so_model::{generate_triple_chain, SecondOrderSystem, TripleChainParams};
use soprbt::Error;

/// Spectrum with only the values, for planning.
fn values(neg: &[f64], pos: &[f64]) -> SignedSpectrum {
    SignedSpectrum {
        neg: neg.to_vec(),
        pos: pos.to_vec(),
        u_neg: Mat::zeros(0, neg.len()),
        u_pos: Mat::zeros(0, pos.len()),
        u_zero: Mat::zeros(0, 0),
        cluster_tol: 1e-8,
    }
}

#[test]
fn identity_factor_has_unit_values() {
    let spec = prbt::signed_eigendecomposition(&Mat::identity(2, 2), 1e-8);
    assert_eq!(spec.neg, vec![1.0]);
    assert_eq!(spec.pos, vec![1.0]);
    assert_eq!(spec.zero_count(), 0);
}

#[test]
fn diagonal_factor_values() {
    let l = Mat::from_diagonal(&DVector::from_vec(vec![0.5f64.sqrt(), 0.25f64.sqrt()]));
    let spec = prbt::signed_eigendecomposition(&l, 1e-8);
    assert!((spec.neg[0] - 0.5).abs() < 1e-15);
    assert!((spec.pos[0] - 0.25).abs() < 1e-15);
}

fn check_reconstruction(sys: &SecondOrderSystem) {
    let fo = lift(sys).unwrap();
    let p = kyp::solve_min_kyp(&fo, &KypOptions::default()).unwrap().p;
    let l = kyp::factorize(&p, 1e-12).unwrap();
    let spec = prbt::signed_eigendecomposition(&l, 1e-8);
    let cols = [spec.u_neg.clone(), spec.u_zero.clone(), spec.u_pos.clone()];
    let mut u = Mat::zeros(l.nrows(), l.nrows());
    let mut at = 0;
    for c in &cols {
        u.view_mut((0, at), c.shape()).copy_from(c);
        at += c.ncols();
    }
    assert_eq!(at, l.nrows());
    let k = l.nrows();
    assert!((u.transpose() * &u - Mat::identity(k, k)).amax() <= 1e-12);
    let diag: Vec<f64> = spec
        .neg
        .iter()
        .map(|s| -s)
        .chain(std::iter::repeat_n(0.0, spec.zero_count()))
        .chain(spec.pos.iter().copied())
        .collect();
    let x = &l * linalg::signature(fo.n()) * l.transpose();
    let rebuilt = &u * Mat::from_diagonal(&DVector::from_vec(diag)) * u.transpose();
    assert!((rebuilt - &x).amax() <= 1e-10 * x.amax());
    assert!(spec
        .neg
        .iter()
        .chain(&spec.pos)
        .all(|&s| s > 0.0 && s <= 1.0 + 1e-8));
}

#[test]
fn eigenvectors_reconstruct_signed_gramian() {
    check_reconstruction(&generate_triple_chain(3, &TripleChainParams::default()).unwrap());
}

/// Here `L S L^T` splits into decoupled blocks with repeated unit values, a case
/// where the dense eigensolver once returned a wrong basis.
#[test]
fn eigenvectors_reconstruct_on_decoupled_blocks() {
    check_reconstruction(&common::random_system(6, 2, 503));
}

/// At `n = 1` the characteristic values are `sqrt(eig(P Q))` with `Q = S P S`,
/// and `P` from a grid search over the one free entry.
#[test]
fn scalar_values_match_balancing_oracle() {
    let one = |x: f64| Mat::from_element(1, 1, x);
    let fo = lift(&SecondOrderSystem::new(
        one(1.0),
        one(0.8),
        one(1.5),
        one(1.0),
    ))
    .unwrap();
    let feasible = |p: f64| {
        linalg::lambda_max(&fo.kyp_matrix(&Mat::from_row_slice(2, 2, &[p, 0.0, 0.0, 1.0]))) <= 1e-10
    };
    let coarse = (0..=4000)
        .map(|i| -1.0 + i as f64 * 1e-3)
        .find(|&p| feasible(p))
        .unwrap();
    let p11 = (1..=1000)
        .map(|i| coarse - i as f64 * 1e-6)
        .filter(|&p| feasible(p))
        .fold(coarse, f64::min);
    let p = Mat::from_row_slice(2, 2, &[p11, 0.0, 0.0, 1.0]);
    let s = linalg::signature(1);
    let mut oracle: Vec<f64> = linalg::eigenvalues(&(&p * &s * &p * &s))
        .unwrap()
        .iter()
        .map(|e| e.re.max(0.0).sqrt())
        .collect();
    oracle.sort_by(f64::total_cmp);

    let pmin = kyp::solve_min_kyp(&fo, &KypOptions::default()).unwrap().p;
    let spec = prbt::signed_eigendecomposition(&kyp::factorize(&pmin, 1e-12).unwrap(), 1e-8);
    let mut got: Vec<f64> = spec.neg.iter().chain(&spec.pos).copied().collect();
    got.resize(2, 0.0);
    got.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-4, "{got:?} vs {oracle:?}");
    }
}

#[test]
fn keeping_everything_has_zero_bound() {
    let spec = values(&[0.9, 0.5, 0.1], &[0.8, 0.4, 0.2]);
    let plan = prbt::plan_truncation(&spec, 3).unwrap();
    assert_eq!(plan.r, 3);
    assert_eq!(plan.error_bound, 0.0);
}

#[test]
fn bound_is_twice_the_truncated_sum() {
    let spec = values(&[0.9, 0.5, 0.1], &[0.9, 0.4, 0.2]);
    let plan = prbt::plan_truncation(&spec, 2).unwrap();
    assert_eq!(plan.r, 2);
    assert_eq!(plan.error_bound, 2.0 * (0.1 + 0.2));
    assert!((plan.error_bound - 0.6).abs() < 1e-15);
}

#[test]
fn unmatched_clusters_are_a_planning_error() {
    let spec = values(&[0.5, 0.5, 0.3], &[0.5, 0.2, 0.2]);
    assert_eq!(spec.cuts(Sign::Negative), vec![0, 2, 3]);
    assert_eq!(spec.cuts(Sign::Positive), vec![0, 1, 3]);
    match prbt::plan_truncation(&spec, 1) {
        Err(Error::Planning { feasible, .. }) => assert_eq!(feasible, vec![3]),
        other => panic!("expected a planning error, got {other:?}"),
    }
}

#[test]
fn unit_values_are_never_truncated() {
    let spec = values(&[1.0, 1.0 - 1e-9, 0.3], &[1.0, 1.0, 0.2]);
    assert_eq!(spec.boundary(Sign::Negative), 2);
    assert!(matches!(
        prbt::plan_truncation(&spec, 1),
        Err(Error::Planning { .. })
    ));
    assert_eq!(prbt::plan_truncation(&spec, 2).unwrap().r, 2);
}

#[test]
fn too_large_target_is_a_planning_error() {
    let spec = values(&[0.9, 0.5], &[0.8, 0.4]);
    assert!(matches!(
        prbt::plan_truncation(&spec, 3),
        Err(Error::Planning { .. })
    ));
    assert!(matches!(
        prbt::plan_full(&values(&[0.9, 0.5], &[0.8])),
        Err(Error::Planning { .. })
    ));
}

fn reduce_full(
    sys: &SecondOrderSystem,
) -> (
    soprbt::fo_realization::StructuredFirstOrder,
    prbt::ReducedStructured,
) {
    let fo = lift(sys).unwrap();
    let p = kyp::solve_min_kyp(&fo, &KypOptions::default()).unwrap().p;
    let l = kyp::factorize(&p, 1e-12).unwrap();
    let spec = prbt::signed_eigendecomposition(&l, 1e-8);
    let plan = prbt::plan_full(&spec).unwrap();
    let red = prbt::reduce(&fo, &l, &spec, &plan).unwrap();
    (fo, red)
}

#[test]
fn full_plan_reproduces_transfer_function() {
    for seed in 0..6 {
        let sys = common::random_system(3 + seed as usize, 1 + seed as usize % 2, 500 + seed);
        let (fo, red) = reduce_full(&sys);
        for &w in &linalg::logspace(1e-2, 1e2, 20) {
            let s = Complex64::new(0.0, w);
            let g = fo.transfer_function(s).unwrap();
            let gr = red.sys.transfer_function(s).unwrap();
            assert!(linalg::cnorm2(&(&gr - &g)) <= 1e-8 * linalg::cnorm2(&g));
        }
    }
}

#[test]
fn reduced_model_structure_and_certificate() {
    let sys = generate_triple_chain(5, &TripleChainParams::default()).unwrap();
    let fo = lift(&sys).unwrap();
    let p = kyp::solve_min_kyp(&fo, &KypOptions::default()).unwrap().p;
    let l = kyp::factorize(&p, 1e-12).unwrap();
    let spec = prbt::signed_eigendecomposition(&l, 1e-8);
    for r in [3, 6, 9] {
        let plan = prbt::plan_truncation(&spec, r).unwrap();
        let red = prbt::reduce(&fo, &l, &spec, &plan).unwrap();
        let sr = linalg::signature(red.r);
        assert_eq!(&sr * &red.sys.a * &sr, red.sys.a.transpose());
        assert_eq!(red.sys.b.rows(0, red.r).amax(), 0.0);
        assert_eq!(red.sys.c, red.sys.b.transpose());
        let scale = linalg::norm2(&red.w) * linalg::norm2(&red.v);
        assert!(red.biorthogonality <= 1e-10 * scale.max(1.0));
        assert!(
            (red.w.transpose() * &red.v - Mat::identity(2 * r, 2 * r)).amax()
                <= 1e-10 * scale.max(1.0)
        );
        let (primal, dual) = red.certificate();
        assert!(
            primal <= 1e-6 && dual <= 1e-6,
            "r = {r}: {primal:.3e}, {dual:.3e}"
        );
    }
}

#[test]
fn sampled_error_shrinks_with_order() {
    let sys = generate_triple_chain(10, &TripleChainParams::default()).unwrap();
    let fo = lift(&sys).unwrap();
    let p = kyp::solve_min_kyp(&fo, &KypOptions::default()).unwrap().p;
    let l = kyp::factorize(&p, 1e-12).unwrap();
    let spec = prbt::signed_eigendecomposition(&l, 1e-8);
    let omegas = linalg::logspace(1e-2, 1e2, 20);
    let errs: Vec<f64> = [8, 12, 16]
        .iter()
        .map(|&r| {
            let plan = prbt::plan_truncation(&spec, r).unwrap();
            let red = prbt::reduce(&fo, &l, &spec, &plan).unwrap();
            omegas
                .iter()
                .map(|&w| {
                    let s = Complex64::new(0.0, w);
                    let g = fo.transfer_function(s).unwrap();
                    linalg::cnorm2(&(red.sys.transfer_function(s).unwrap() - &g))
                        / linalg::cnorm2(&g)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[1] <= errs[0] && errs[2] <= errs[1], "{errs:?}");
}

fn descending(v: Vec<f64>) -> Vec<f64> {
    let mut v = v;
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nested_plans_have_nonincreasing_bounds(
        neg in prop::collection::vec(1e-3f64..0.99, 6),
        pos in prop::collection::vec(1e-3f64..0.99, 6),
    ) {
        let spec = values(&descending(neg), &descending(pos));
        let mut last = f64::INFINITY;
        for r in 1..=6 {
            let plan = prbt::plan_truncation(&spec, r).unwrap();
            prop_assert_eq!(plan.r, r);
            prop_assert_eq!(plan.error_bound, 2.0 * (plan.truncated_sum_neg + plan.truncated_sum_pos));
            prop_assert!(plan.error_bound <= last);
            last = plan.error_bound;
        }
    }

    #[test]
    fn plans_never_split_clusters(
        groups in prop::collection::vec((0.05f64..0.95, 1usize..3), 1..4),
        target in 1usize..6,
    ) {
        // identical groups on both sides, so every cluster boundary is feasible
        let mut vals: Vec<f64> = groups.iter().flat_map(|&(v, k)| std::iter::repeat_n(v, k)).collect();
        vals = descending(vals);
        let spec = values(&vals, &vals);
        let cuts = spec.cuts(Sign::Negative);
        match prbt::plan_truncation(&spec, target) {
            Ok(plan) => {
                prop_assert!(cuts.contains(&plan.r));
                prop_assert!(plan.r >= target);
            }
            Err(Error::Planning { .. }) => prop_assert!(target > vals.len()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
