//! Overdamped inputs stay overdamped after reduction, with reduced poles
//! separated by sign type.
//!
//! cargo run --release --example overdamped_preservation

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soprbt::linalg::{self, Mat};
use soprbt::pipeline::{reduce_second_order, PipelineConfig};
use soprbt::so_model::{generate_triple_chain, SecondOrderSystem, TripleChainParams};

/// `M = I`, `D` and `K` sharing a random eigenbasis, with modal pole pairs
/// drawn so that every slow pole lies to the right of every fast one.
fn prescribed_poles(n: usize, m: usize, seed: u64) -> SecondOrderSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = linalg::full_q(&Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)));
    let (mut d, mut k) = (Vec::new(), Vec::new());
    for _ in 0..n {
        let slow: f64 = rng.gen_range(-1.0..-0.3);
        let fast: f64 = rng.gen_range(-6.0..-2.0);
        d.push(-(slow + fast));
        k.push(slow * fast);
    }
    let modal = |v: Vec<f64>| &q * Mat::from_diagonal(&DVector::from_vec(v)) * q.transpose();
    let b = Mat::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
    SecondOrderSystem::new(
        Mat::identity(n, n),
        linalg::sym(&modal(d)),
        linalg::sym(&modal(k)),
        b,
    )
}

fn main() -> soprbt::Result<()> {
    let diagonal = SecondOrderSystem::new(
        Mat::identity(5, 5),
        Mat::identity(5, 5) * 4.0,
        Mat::identity(5, 5),
        Mat::from_fn(5, 1, |i, _| 1.0 + i as f64),
    );
    let heavy = TripleChainParams {
        alpha: 2.5,
        beta: 2.5,
        ..Default::default()
    };
    let cases = [
        ("diagonal", diagonal, None),
        (
            "heavily damped triple chain",
            generate_triple_chain(4, &heavy)?,
            Some(6),
        ),
        ("prescribed real poles", prescribed_poles(8, 2, 7), None),
    ];
    for (name, sys, target_r) in cases {
        println!(
            "{name}: n = {}, overdamped = {}",
            sys.n(),
            sys.is_overdamped(1e-12)?.overdamped
        );
        let cfg = PipelineConfig {
            target_r,
            ..Default::default()
        };
        let out = reduce_second_order(&sys, &cfg)?;
        match out.overdamped {
            Some(rep) => println!(
                "  reduced r = {}: min eig D = {:.3e}, min eig K = {:.3e}, overdamped = {}, \
                 max negative-type pole {:.4} < min positive-type pole {:.4}: {}",
                out.recovery.final_r,
                rep.d_min_eig,
                rep.k_min_eig,
                rep.overdamped,
                rep.poles_negative_type
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max),
                rep.poles_positive_type
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min),
                rep.interlaced
            ),
            None => println!("  input not overdamped, check skipped"),
        }
    }
    Ok(())
}
