//! Sampled absolute and relative errors of reductions of increasing order,
//! next to the a-priori bound.
//!
//! cargo run --release --example frequency_analysis

use soprbt::analysis::{compare, summarize};
use soprbt::pipeline::{reduce_second_order, PipelineConfig};
use soprbt::so_model::{generate_triple_chain, FrequencyGrid};

fn main() -> soprbt::Result<()> {
    let sys = generate_triple_chain(10, &Default::default())?;
    let omegas = FrequencyGrid::log(1e-2, 1e2, 200).omegas();
    println!(
        "{:>4} {:>12} {:>12} {:>12}",
        "r", "max abs", "max rel", "bound"
    );
    for r in [4, 8, 12, 16, 20, 24] {
        let cfg = PipelineConfig {
            target_r: Some(r),
            ..Default::default()
        };
        let out = reduce_second_order(&sys, &cfg)?;
        let rows = compare(&sys, &out.recovery.result.to_system(), &omegas)?;
        let s = summarize(&rows, Some(out.plan.error_bound));
        println!(
            "{:>4} {:>12.4e} {:>12.4e} {:>12.4e}",
            out.plan.r, s.max_abs_error, s.max_rel_error, out.plan.error_bound
        );
    }
    Ok(())
}
