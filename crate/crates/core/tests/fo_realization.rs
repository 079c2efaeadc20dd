mod common;

use common::Mat;
use num_complex::Complex64;
use proptest::prelude::*;
use soprbt::fo_realization::{lift, moments_reconstruct, ZeroTol};
use soprbt::linalg;
use soprbt::so_model::{generate_triple_chain, SecondOrderSystem, TripleChainParams};

fn scalar(m: f64, d: f64, k: f64, b: f64) -> SecondOrderSystem {
    let one = |x: f64| Mat::from_element(1, 1, x);
    SecondOrderSystem::new(one(m), one(d), one(k), one(b))
}

fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
    (a - b).amax() <= tol
}

#[test]
fn scalar_lifts_by_hand() {
    let fo = lift(&scalar(1.0, 0.0, 1.0, 1.0)).unwrap();
    assert!(close(
        &fo.a,
        &Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        1e-15
    ));
    assert!(close(
        &fo.b,
        &Mat::from_column_slice(2, 1, &[0.0, 1.0]),
        1e-15
    ));

    // H = 2, G = 3
    let fo = lift(&scalar(4.0, 2.0, 9.0, 1.0)).unwrap();
    assert!(close(
        &fo.a,
        &Mat::from_row_slice(2, 2, &[0.0, 1.5, -1.5, -0.5]),
        1e-15
    ));
    assert!(close(
        &fo.b,
        &Mat::from_column_slice(2, 1, &[0.0, 0.5]),
        1e-15
    ));
    assert_eq!(fo.c, fo.b.transpose());
}

#[test]
fn lift_structure_on_random_instance() {
    let fo = lift(&common::random_system(8, 2, 5)).unwrap();
    let s = linalg::signature(8);
    assert!(close(
        &(&s * &fo.a * &s),
        &fo.a.transpose(),
        1e-12 * fo.a.amax()
    ));
    assert!(linalg::lambda_max(&(&fo.a + fo.a.transpose())) <= 1e-12 * fo.a.amax());
}

#[test]
fn lift_rejects_indefinite_mass() {
    assert!(lift(&scalar(-1.0, 1.0, 1.0, 1.0)).is_err());
}

#[test]
fn first_order_transfer_by_hand() {
    let fo = lift(&scalar(1.0, 0.0, 1.0, 1.0)).unwrap();
    let g = fo.transfer_function(Complex64::new(0.0, 2.0)).unwrap();
    assert!((g[(0, 0)] - Complex64::new(0.0, -2.0 / 3.0)).norm() < 1e-15);
    let g0 = lift(&common::random_system(5, 2, 1))
        .unwrap()
        .transfer_function(Complex64::new(0.0, 0.0))
        .unwrap();
    assert!(g0.camax() < 1e-14);
}

#[test]
fn first_order_transfer_matches_triple_chain() {
    let sys = generate_triple_chain(2, &TripleChainParams::default()).unwrap();
    let fo = lift(&sys).unwrap();
    for &w in &linalg::logspace(1e-2, 1e2, 20) {
        let s = Complex64::new(0.0, w);
        let g = sys.transfer_function(s).unwrap();
        let gf = fo.transfer_function(s).unwrap();
        assert!(
            linalg::cnorm2(&(&gf - &g)) <= 1e-10 * linalg::cnorm2(&g),
            "omega = {w}"
        );
    }
}

#[test]
fn undamped_oscillator_has_one_zero_at_origin() {
    let fo = lift(&scalar(1.0, 0.0, 1.0, 1.0)).unwrap();
    let z = fo.zeros(&ZeroTol::default()).unwrap();
    assert_eq!(z.zeros.len(), 1);
    assert!(z.zeros[0].value().norm() < 1e-12);
    assert_eq!(z.zeros[0].multiplicity, 1);
    assert!(z.zeros[0].semi_simple);
}

#[test]
fn damped_scalar_zeros_are_real_nonpositive() {
    let fo = lift(&scalar(1.0, 3.0, 2.0, 1.0)).unwrap();
    let z = fo.zeros(&ZeroTol::default()).unwrap();
    assert!(z.zeros.iter().all(|z| z.im.abs() < 1e-12 && z.re <= 1e-12));
    assert_eq!(z.multiplicity_at(Complex64::new(0.0, 0.0), 1e-9), 1);
}

#[test]
fn triple_chain_zeros_closed_under_conjugation() {
    let fo = lift(&generate_triple_chain(2, &TripleChainParams::default()).unwrap()).unwrap();
    let zl = fo.zeros(&ZeroTol::default()).unwrap();
    let vals = zl.values();
    assert!(!vals.is_empty());
    for z in &vals {
        let nearest = vals
            .iter()
            .map(|w| (w - z.conj()).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest <= 1e-8 * z.norm().max(1.0),
            "{z} has no conjugate partner"
        );
    }
    let total: usize = zl.zeros.iter().map(|z| z.multiplicity).sum();
    assert_eq!(total + zl.infinite, 2 * fo.n() + fo.inputs());
}

#[test]
fn identity_certifies_every_lift() {
    for seed in 0..10 {
        let fo = lift(&common::random_system(
            2 + seed as usize % 5,
            1 + seed as usize % 2,
            seed,
        ))
        .unwrap();
        let res = fo.kyp_residual(&Mat::identity(fo.a.nrows(), fo.a.nrows()));
        assert!(res.lmi_max_eig <= 1e-12 * fo.a.amax());
        assert!(res.coupling_norm <= 1e-15);
    }
}

#[test]
fn doubled_identity_is_not_a_certificate() {
    let fo = lift(&scalar(1.0, 0.0, 1.0, 1.0)).unwrap();
    let res = fo.kyp_residual(&(Mat::identity(2, 2) * 2.0));
    assert!((res.coupling_norm - linalg::norm2(&fo.b)).abs() < 1e-15);
    assert!(res.lmi_max_eig > 0.0);
}

/// `X = [I 0]`, `Z = [[0, I], [-M^-1 K, -M^-1 D]]`, `Y = [0; M^-1]`.
fn companion(m: &Mat, d: &Mat, k: &Mat) -> (Mat, Mat, Mat) {
    let n = m.nrows();
    let minv = m.clone().try_inverse().unwrap();
    let mut x = Mat::zeros(n, 2 * n);
    x.view_mut((0, 0), (n, n)).fill_with_identity();
    let mut z = Mat::zeros(2 * n, 2 * n);
    z.view_mut((0, n), (n, n)).fill_with_identity();
    z.view_mut((n, 0), (n, n)).copy_from(&(-&minv * k));
    z.view_mut((n, n), (n, n)).copy_from(&(-&minv * d));
    let mut y = Mat::zeros(2 * n, n);
    y.view_mut((n, 0), (n, n)).copy_from(&minv);
    (x, z, y)
}

#[test]
fn moments_of_scalar_companions() {
    let x = Mat::from_row_slice(1, 2, &[1.0, 0.0]);
    let z = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -1.0]);
    let y = Mat::from_column_slice(2, 1, &[0.0, 1.0]);
    let (m, d, k) = moments_reconstruct(&x, &z, &y).unwrap();
    assert_eq!((m[(0, 0)], d[(0, 0)], k[(0, 0)]), (1.0, 1.0, 1.0));

    let one = |v: f64| Mat::from_element(1, 1, v);
    let (x, z, y) = companion(&one(1.0), &one(2.0), &one(3.0));
    let (m, d, k) = moments_reconstruct(&x, &z, &y).unwrap();
    assert!(
        close(&m, &one(1.0), 1e-14) && close(&d, &one(2.0), 1e-14) && close(&k, &one(3.0), 1e-14)
    );
}

#[test]
fn moments_are_similarity_invariant() {
    let mut rng = common::rng(4);
    let sys = common::random_system(3, 3, 9);
    let (x, z, y) = companion(&sys.m, &sys.d, &sys.k);
    let t = common::randn(&mut rng, 6, 6) + Mat::identity(6, 6) * 3.0;
    let ti = t.clone().try_inverse().unwrap();
    let (m1, d1, k1) = moments_reconstruct(&x, &z, &y).unwrap();
    let (m2, d2, k2) = moments_reconstruct(&(&x * &t), &(&ti * &z * &t), &(&ti * &y)).unwrap();
    assert!(common::rel_err(&m2, &m1) <= 1e-10);
    assert!(common::rel_err(&d2, &d1) <= 1e-10);
    assert!(common::rel_err(&k2, &k1) <= 1e-10);
}

#[test]
fn moments_reject_non_triples() {
    let x = Mat::from_row_slice(1, 2, &[1.0, 0.0]);
    let z = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -1.0]);
    let y = Mat::from_column_slice(2, 1, &[1.0, 1.0]);
    assert!(moments_reconstruct(&x, &z, &y).is_err());
}

#[test]
fn moments_recover_random_quadratics() {
    let mut rng = common::rng(50);
    for trial in 0..50 {
        let n = 1 + trial % 2;
        // general (nonsymmetric) coefficients with an invertible leading term
        let m = common::randn(&mut rng, n, n) + Mat::identity(n, n) * 2.0;
        let m = if trial % 3 == 0 {
            Mat::identity(n, n)
        } else {
            m
        };
        let d = common::randn(&mut rng, n, n);
        let k = common::randn(&mut rng, n, n);
        let (x, z, y) = companion(&m, &d, &k);
        let (m2, d2, k2) = moments_reconstruct(&x, &z, &y).unwrap();
        assert!(common::rel_err(&m2, &m) <= 1e-10, "trial {trial}");
        assert!(common::rel_err(&d2, &d) <= 1e-10, "trial {trial}");
        assert!(common::rel_err(&k2, &k) <= 1e-10, "trial {trial}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lift_keeps_structure(n in 1usize..8, m in 1usize..3, seed in any::<u64>()) {
        prop_assume!(m <= n);
        let sys = common::random_system(n, m, seed);
        let fo = lift(&sys).unwrap();
        fo.check_structure(1e-12).unwrap();
    }

    #[test]
    fn lift_preserves_transfer_function(n in 1usize..7, m in 1usize..3, seed in any::<u64>(), w in 1e-2f64..1e2) {
        prop_assume!(m <= n);
        let sys = common::random_system(n, m, seed);
        let fo = lift(&sys).unwrap();
        let s = Complex64::new(0.0, w);
        let g = sys.transfer_function(s).unwrap();
        let gf = fo.transfer_function(s).unwrap();
        prop_assert!(linalg::cnorm2(&(&gf - &g)) <= 1e-10 * linalg::cnorm2(&g));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn origin_is_a_zero_of_multiplicity_m(n in 2usize..6, m in 1usize..3, seed in any::<u64>()) {
        let sys = common::random_system(n, m, seed);
        let zl = lift(&sys).unwrap().zeros(&ZeroTol::default()).unwrap();
        prop_assert!(zl.multiplicity_at(Complex64::new(0.0, 0.0), 1e-8) >= m);
    }
}
