//! Write the triple-chain benchmark to a system directory.
//!
//! cargo run --example generate_triple_chain -- [n_per_row] [out_dir]

use std::path::PathBuf;

use soprbt::io::{self, system::TripleChainMeta, MassKind, SystemMeta};
use soprbt::so_model::{generate_triple_chain, TripleChainParams, ValidationTol};

fn main() -> soprbt::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_per_row: usize = args
        .next()
        .map_or(10, |a| a.parse().expect("integer n_per_row"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "triple_chain".into()));
    let params = TripleChainParams::default();
    let sys = generate_triple_chain(n_per_row, &params)?;
    let report = sys.validation_report(&ValidationTol::default())?;
    println!(
        "{} positions, min eig M/D/K = {:.3e} / {:.3e} / {:.3e}, rank B = {}",
        report.n, report.min_eig_m, report.min_eig_d, report.min_eig_k, report.rank_b
    );
    let meta = SystemMeta {
        n: sys.n(),
        m: sys.inputs(),
        mass: MassKind::Matrix,
        triple_chain: Some(TripleChainMeta { n_per_row, params }),
        reduced_from: None,
    };
    io::write_system(&out, &sys, &meta)?;
    println!("wrote {}", out.display());
    Ok(())
}
