//! Reduce the three-row mass-spring-damper chain and compare transfer
//! functions against the original model.
//!
//! cargo run --release --example reduce_triple_chain -- [n_per_row] [r]

use num_complex::Complex64;
use soprbt::linalg;
use soprbt::pipeline::{reduce_second_order, PipelineConfig};
use soprbt::so_model::{generate_triple_chain, FrequencyGrid};

fn main() -> soprbt::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let n_per_row = args.next().unwrap_or(10);
    let r = args.next().unwrap_or(12);
    let sys = generate_triple_chain(n_per_row, &Default::default())?;
    let cfg = PipelineConfig {
        target_r: Some(r),
        ..Default::default()
    };
    let out = reduce_second_order(&sys, &cfg)?;
    for t in &out.timings {
        println!("{:>10}: {:.3} s", t.stage, t.seconds);
    }
    let rom = &out.recovery.result;
    println!(
        "n = {}  kept r = {}  reduced dof = {}  error bound = {:.3e}",
        sys.n(),
        out.plan.r,
        rom.r(),
        out.plan.error_bound
    );
    println!(
        "negative damping eigenvalues: {}",
        rom.negative_damping_count()
    );
    let mut worst: f64 = 0.0;
    for w in FrequencyGrid::log(1e-2, 1e2, 200).omegas() {
        let s = Complex64::new(0.0, w);
        let g = sys.transfer_function(s)?;
        let gr = rom.transfer_function(s)?;
        worst = worst.max(linalg::cnorm2(&(gr - &g)) / linalg::cnorm2(&g));
    }
    println!("max relative error on [1e-2, 1e2]: {worst:.3e}");
    Ok(())
}
