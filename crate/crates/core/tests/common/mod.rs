#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soprbt::so_model::SecondOrderSystem;

pub type Mat = DMatrix<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
}

/// X X^T + shift I.
pub fn spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Mat {
    let x = randn(rng, n, n);
    &x * x.transpose() + Mat::identity(n, n) * shift
}

/// Random system with M, D, K positive definite.
pub fn random_system(n: usize, m: usize, seed: u64) -> SecondOrderSystem {
    let mut r = rng(seed);
    let mm = spd(&mut r, n, 0.5);
    let d = spd(&mut r, n, 0.1);
    let k = spd(&mut r, n, 0.5);
    let b = randn(&mut r, n, m);
    SecondOrderSystem::new(mm, d, k, b)
}

pub fn rel_err(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
