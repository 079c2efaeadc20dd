//! Reduced models built directly in balanced form with prescribed typed
//! zeros, for exercising the recovery path (padding in particular) without
//! depending on which zeros a truncation happens to produce.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fo_realization::StructuredFirstOrder;
use crate::linalg::{self, Mat};
use crate::prbt::ReducedStructured;

/// Single-input model with `l = 0` and state layout `(1, p | p, 1)`. The
/// zero dynamics have eigenvalues `mu_plus` on S-negative coordinates and
/// `mu_minus` on S-positive ones (so `p = mu_plus.len() = mu_minus.len()`),
/// mixed by a random signature-preserving transform when `mix` is set.
pub fn balanced_instance(
    mu_plus: &[f64],
    mu_minus: &[f64],
    seed: u64,
    mix: bool,
) -> Result<ReducedStructured> {
    let p = mu_plus.len();
    if mu_minus.len() != p
        || mu_plus
            .iter()
            .chain(mu_minus)
            .any(|&x| x.is_nan() || x >= 0.0)
    {
        return Err(Error::Validation(
            "need equally many negative zeros of each type".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sp = linalg::signature(p);
    let diag = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
        2 * p,
        mu_plus.iter().chain(mu_minus).copied(),
    ));
    let az = if mix {
        let h = hyperbolic_mix(p, &mut rng);
        linalg::solve(&h, &(&diag * &h))?
    } else {
        diag
    };
    debug_assert!((&sp * &az * &sp - az.transpose()).amax() < 1e-8 * az.amax());

    let r = p + 1;
    let n2 = 2 * r;
    let last = n2 - 1;
    let mut a = Mat::zeros(n2, n2);
    a.view_mut((1, 1), (2 * p, 2 * p)).copy_from(&az);
    let link: f64 = rng.gen_range(0.5..2.0);
    a[(0, last)] = link;
    a[(last, 0)] = -link;
    for i in 1..=2 * p {
        let c: f64 = rng.gen_range(-1.0..1.0);
        a[(i, last)] = c;
        // signature symmetry: sign flips between the halves
        a[(last, i)] = if i < r { -c } else { c };
    }
    a[(last, last)] = -rng.gen_range(0.5..2.0);
    let mut b = Mat::zeros(n2, 1);
    b[(last, 0)] = rng.gen_range(0.5..2.0);
    let c = b.transpose();
    let mut sigma = vec![1.0];
    sigma.extend((0..2 * p).map(|i| 0.5 / (1 + i % p) as f64));
    sigma.push(1.0);
    Ok(ReducedStructured {
        sys: StructuredFirstOrder { a, b, c },
        r,
        sigma,
        w: Mat::identity(n2, n2),
        v: Mat::identity(n2, n2),
        biorthogonality: 0.0,
        raw_biorthogonality: 0.0,
        structure_defect: 0.0,
    })
}

/// Product of random hyperbolic rotations coupling S-negative coordinate `i`
/// with S-positive coordinate `p + j`, and random rotations within each half.
fn hyperbolic_mix(p: usize, rng: &mut ChaCha8Rng) -> Mat {
    let q1 = linalg::full_q(&Mat::from_fn(p, p, |_, _| rng.gen_range(-1.0..1.0)));
    let q2 = linalg::full_q(&Mat::from_fn(p, p, |_, _| rng.gen_range(-1.0..1.0)));
    let mut h = linalg::block_diag(&[&q1, &q2]);
    for i in 0..p {
        let t: f64 = rng.gen_range(-0.8..0.8);
        let mut g = Mat::identity(2 * p, 2 * p);
        let j = p + (i + 1) % p;
        g[(i, i)] = t.cosh();
        g[(j, j)] = t.cosh();
        g[(i, j)] = t.sinh();
        g[(j, i)] = t.sinh();
        h = g * h;
    }
    h
}
