//! Typed zeros that violate the pairing condition trigger padding with
//! decoupled states; the transfer function is unchanged.
//!
//! cargo run --example padding

use soprbt::recovery::{self, synthetic::balanced_instance, RecoveryOptions};

fn main() -> soprbt::Result<()> {
    let cases: [(&[f64], &[f64]); 3] = [
        (&[-3.0], &[-1.0]),
        (&[-3.0, -0.5], &[-2.0, -1.0]),
        (&[-4.0, -0.3], &[-1.0, -0.7]),
    ];
    for (i, (mu_plus, mu_minus)) in cases.into_iter().enumerate() {
        let red = balanced_instance(mu_plus, mu_minus, i as u64, i > 0)?;
        let rep = recovery::recover(&red, &RecoveryOptions::default())?;
        println!("mu+ = {mu_plus:?}, mu- = {mu_minus:?}");
        println!("  condition satisfied before padding: {}", rep.condition_ok);
        println!("  added (mu+, mu-) values: {:?}", rep.padding);
        println!("  r: {} -> {}", red.r, rep.final_r);
        println!(
            "  transfer change from padding {:.2e}, second-order vs first-order {:.2e}, min eig K {:.3e}",
            rep.residuals.padding_mismatch, rep.residuals.transfer_mismatch, rep.residuals.k_min_eig
        );
    }
    Ok(())
}
