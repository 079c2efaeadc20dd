//! Invariant zeros of a lifted system, and recovery of `(M, D, K)` from the
//! moments of a standard triple.
//!
//! cargo run --example zeros_and_moments

use soprbt::fo_realization::{lift, moments_reconstruct, ZeroTol};
use soprbt::linalg::{self, Mat};
use soprbt::so_model::generate_triple_chain;

fn main() -> soprbt::Result<()> {
    let sys = generate_triple_chain(2, &Default::default())?;
    let n = sys.n();
    let fo = lift(&sys)?;
    let zeros = fo.zeros(&ZeroTol::default())?;
    println!(
        "{} finite zeros, {} at infinity",
        zeros.zeros.len(),
        zeros.infinite
    );
    for z in &zeros.zeros {
        println!(
            "  {:+.5} {:+.5}i  multiplicity {}  semi-simple {}",
            z.re, z.im, z.multiplicity, z.semi_simple
        );
    }

    // companion triple of s^2 M + s D + K
    let minv = linalg::inverse(&sys.m)?;
    let mut z = Mat::zeros(2 * n, 2 * n);
    z.view_mut((0, n), (n, n)).fill_with_identity();
    z.view_mut((n, 0), (n, n)).copy_from(&(-(&minv * &sys.k)));
    z.view_mut((n, n), (n, n)).copy_from(&(-(&minv * &sys.d)));
    let mut x = Mat::zeros(n, 2 * n);
    x.view_mut((0, 0), (n, n)).fill_with_identity();
    let mut y = Mat::zeros(2 * n, n);
    y.view_mut((n, 0), (n, n)).copy_from(&minv);
    let (m, d, k) = moments_reconstruct(&x, &z, &y)?;
    println!(
        "moment reconstruction errors: M {:.2e}, D {:.2e}, K {:.2e}",
        (&m - &sys.m).amax(),
        (&d - &sys.d).amax(),
        (&k - &sys.k).amax()
    );
    Ok(())
}
