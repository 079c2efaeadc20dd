//! Signed characteristic values of a lifted system and sign types of the
//! eigenvalues of an S-self-adjoint matrix.
//!
//! cargo run --example sign_characteristics

use soprbt::fo_realization::lift;
use soprbt::kyp::{factorize, solve_min_kyp, KypOptions};
use soprbt::linalg::{self, Mat};
use soprbt::prbt::{signed_eigendecomposition, Sign};
use soprbt::recovery::{sign_typed_diagonalize, theta_block, SignTol};
use soprbt::so_model::generate_triple_chain;

fn main() -> soprbt::Result<()> {
    let sys = generate_triple_chain(4, &Default::default())?;
    let fo = lift(&sys)?;
    let sol = solve_min_kyp(&fo, &KypOptions::default())?;
    let spec = signed_eigendecomposition(&factorize(&sol.p, 1e-12)?, 1e-8);
    for sign in [Sign::Negative, Sign::Positive] {
        let head: Vec<String> = spec
            .side(sign)
            .iter()
            .take(6)
            .map(|s| format!("{s:.4}"))
            .collect();
        println!(
            "{sign:?}: {} values, boundary {}, first {}",
            spec.side(sign).len(),
            spec.boundary(sign),
            head.join(" ")
        );
        println!("  feasible cuts: {:?}", spec.cuts(sign));
    }

    // a diagonal S-self-adjoint matrix with one complex pair, conjugated by
    // a hyperbolic rotation so the types are not visible from the entries
    let s = linalg::signature(2);
    let mut a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -0.5, -2.0, -0.5]));
    a[(1, 3)] = 0.8;
    a[(3, 1)] = -0.8;
    let (c, sh) = (0.6f64.cosh(), 0.6f64.sinh());
    let h = Mat::from_row_slice(
        4,
        4,
        &[
            c, 0.0, sh, 0.0, 0.0, 1.0, 0.0, 0.0, sh, 0.0, c, 0.0, 0.0, 0.0, 0.0, 1.0,
        ],
    );
    let mixed = linalg::solve(&h, &(&a * &h))?;
    let st = sign_typed_diagonalize(&s, &mixed, &SignTol::default())?;
    for e in &st.real_eigs {
        println!("real eigenvalue {:.4} has sign type {:+}", e.lambda, e.sign);
    }
    for pair in &st.complex_pairs {
        let th = theta_block(pair.sigma, pair.tau);
        println!(
            "complex pair {:.4} +- {:.4}i: theta block gives nu = {:.4}, eta = {:.4}",
            pair.sigma, pair.tau, th.nu, th.eta
        );
    }
    Ok(())
}
