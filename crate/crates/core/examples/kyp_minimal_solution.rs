//! Minimal solution of the KYP inequality for a lifted mechanical system,
//! with its residual certificates and the dual solution.
//!
//! cargo run --example kyp_minimal_solution

use soprbt::fo_realization::lift;
use soprbt::kyp::{factorize, solve_min_kyp, KypOptions};
use soprbt::linalg::{self, Mat};
use soprbt::so_model::generate_triple_chain;

fn main() -> soprbt::Result<()> {
    let sys = generate_triple_chain(3, &Default::default())?;
    let fo = lift(&sys)?;
    let sol = solve_min_kyp(&fo, &KypOptions::default())?;
    let n2 = sol.p.nrows();
    println!("method {:?}, rank {} of {n2}", sol.method, sol.rank);
    println!(
        "lambda_max of the KYP matrix: {:.3e}",
        sol.residuals.lmi_max_eig
    );
    println!("||P B - C^T||: {:.3e}", sol.residuals.coupling_norm);
    println!(
        "lambda_max(P - I): {:.3e}",
        linalg::lambda_max(&(&sol.p - Mat::identity(n2, n2)))
    );

    // the dual system has minimal solution S P S
    let dual = solve_min_kyp(&fo.dual(), &KypOptions::default())?;
    let s = linalg::signature(fo.n());
    println!(
        "||S P S - Q|| = {:.3e}",
        linalg::norm2(&(&s * &sol.p * &s - &dual.p))
    );

    let l = factorize(&sol.p, 1e-12)?;
    println!(
        "factor L: {} x {}, ||L^T L - P|| = {:.3e}",
        l.nrows(),
        l.ncols(),
        linalg::norm2(&(l.transpose() * &l - &sol.p))
    );
    Ok(())
}
