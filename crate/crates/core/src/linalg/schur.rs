//! Real Schur form with eigenvalue reordering.
//!
//! nalgebra computes the quasi-triangular form but cannot reorder it. Adjacent
//! 1x1/2x2 diagonal blocks are exchanged here by solving the small Sylvester
//! equation `T11 X - X T22 = T12` and rotating with the QR factor of
//! `[-X; I]`, which is the classical direct swapping scheme.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Mat;
use crate::error::{Error, Result};

/// `A = q * t * q^T` with `t` quasi upper triangular.
#[derive(Debug, Clone)]
pub struct RealSchur {
    pub q: Mat,
    pub t: Mat,
}

#[derive(Debug, Clone)]
pub struct OrderedSchur {
    pub q: Mat,
    pub t: Mat,
    /// Leading columns of `q` spanning the selected invariant subspace.
    pub selected: usize,
}

impl RealSchur {
    /// Start index and size of every diagonal block.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        blocks_of(&self.t)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        real_schur_eigs(&self.t)
    }
}

/// Eigenvalues of a quasi upper triangular matrix, in diagonal order.
pub fn real_schur_eigs(t: &Mat) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(t.nrows());
    for (i, sz) in blocks_of(t) {
        let (a, b) = block_eigs(t, i, sz);
        out.push(a);
        if sz == 2 {
            out.push(b);
        }
    }
    out
}

fn blocks_of(t: &Mat) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            out.push((i, 2));
            i += 2;
        } else {
            out.push((i, 1));
            i += 1;
        }
    }
    out
}

fn block_eigs(t: &Mat, i: usize, sz: usize) -> (Complex64, Complex64) {
    if sz == 1 {
        let l = Complex64::new(t[(i, i)], 0.0);
        return (l, l);
    }
    let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
    let tr = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (Complex64::new(tr - s, 0.0), Complex64::new(tr + s, 0.0))
    } else {
        let s = (-disc).sqrt();
        (Complex64::new(tr, s), Complex64::new(tr, -s))
    }
}

/// Real Schur decomposition with 2x2 blocks only for complex pairs.
pub fn real_schur(a: &Mat) -> Result<RealSchur> {
    let n = a.nrows();
    if n == 0 {
        return Ok(RealSchur {
            q: Mat::zeros(0, 0),
            t: Mat::zeros(0, 0),
        });
    }
    let (mut q, mut t) = raw_schur(a)?;
    for j in 0..n {
        for i in j + 2..n {
            t[(i, j)] = 0.0;
        }
    }
    for i in 0..n.saturating_sub(1) {
        let scale = t[(i, i)].abs() + t[(i + 1, i + 1)].abs();
        if t[(i + 1, i)].abs() <= f64::EPSILON * scale {
            t[(i + 1, i)] = 0.0;
        }
    }
    for i in 0..n.saturating_sub(2) {
        if t[(i + 1, i)] != 0.0 && t[(i + 2, i + 1)] != 0.0 {
            return Err(Error::Solver(
                "Schur form has overlapping 2x2 blocks".into(),
            ));
        }
    }
    let mut i = 0;
    while i + 1 < n {
        if t[(i + 1, i)] != 0.0 {
            let (l1, _) = block_eigs(&t, i, 2);
            if l1.im == 0.0 {
                split_real_pair(&mut t, &mut q, i, l1.re);
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(RealSchur { q, t })
}

/// nalgebra's QR iteration has no exceptional shifts and can stall on highly
/// symmetric inputs (e.g. repeated eigenvalues in a permuted layout). On
/// failure, retry on `Z^T A Z` for a few fixed random orthogonal `Z`.
fn raw_schur(a: &Mat) -> Result<(Mat, Mat)> {
    let n = a.nrows();
    let max_iter = 200 * n.max(10);
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, max_iter) {
        return Ok(s.unpack());
    }
    for seed in 0..4u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = super::full_q(&Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)));
        if let Some(s) = Schur::try_new(z.transpose() * a * &z, f64::EPSILON, max_iter) {
            let (q, t) = s.unpack();
            return Ok((z * q, t));
        }
    }
    Err(Error::Solver(format!(
        "real Schur iteration did not converge (n = {n})"
    )))
}

/// Triangularize a 2x2 block that has real eigenvalues.
fn split_real_pair(t: &mut Mat, q: &mut Mat, i: usize, lambda: f64) {
    let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
    let v1 = (b, lambda - a);
    let v2 = (lambda - d, c);
    let (x, y) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
        v1
    } else {
        v2
    };
    let h = x.hypot(y);
    let g = DMatrix::from_row_slice(2, 2, &[x / h, -y / h, y / h, x / h]);
    apply_similarity(t, q, i, &g);
    t[(i + 1, i)] = 0.0;
}

/// t <- G^T t G and q <- q G for an orthogonal G acting on rows/cols i..i+k.
fn apply_similarity(t: &mut Mat, q: &mut Mat, i: usize, g: &Mat) {
    let n = t.nrows();
    let k = g.nrows();
    let rows = t.view((i, 0), (k, n)).into_owned();
    t.view_mut((i, 0), (k, n))
        .copy_from(&(g.transpose() * rows));
    let cols = t.view((0, i), (n, k)).into_owned();
    t.view_mut((0, i), (n, k)).copy_from(&(cols * g));
    let qc = q.view((0, i), (q.nrows(), k)).into_owned();
    q.view_mut((0, i), (q.nrows(), k)).copy_from(&(qc * g));
}

/// Exchange the adjacent blocks at `j` (size p) and `j + p` (size r).
fn swap_blocks(t: &mut Mat, q: &mut Mat, j: usize, p: usize, r: usize) -> Result<()> {
    let k = p + r;
    let t11 = t.view((j, j), (p, p)).into_owned();
    let t12 = t.view((j, j + p), (p, r)).into_owned();
    let t22 = t.view((j + p, j + p), (r, r)).into_owned();
    // (I_r kron T11 - T22^T kron I_p) vec(X) = vec(T12)
    let mut kron = Mat::zeros(p * r, p * r);
    for c in 0..r {
        for rr in 0..p {
            let row = c * p + rr;
            for cc in 0..p {
                kron[(row, c * p + cc)] += t11[(rr, cc)];
            }
            for c2 in 0..r {
                kron[(row, c2 * p + rr)] -= t22[(c2, c)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_iterator(
        p * r,
        (0..r)
            .flat_map(|c| (0..p).map(move |rr| (rr, c)))
            .map(|(rr, c)| t12[(rr, c)]),
    );
    let x = kron
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("Schur block swap: blocks share an eigenvalue".into()))?;
    let mut basis = Mat::zeros(k, r);
    for c in 0..r {
        for rr in 0..p {
            basis[(rr, c)] = -x[c * p + rr];
        }
        basis[(p + c, c)] = 1.0;
    }
    let g = super::full_q(&basis);
    apply_similarity(t, q, j, &g);
    let scale = t.view((j, j), (k, k)).amax().max(f64::MIN_POSITIVE);
    let mut resid: f64 = 0.0;
    for rr in j + r..j + k {
        for c in j..j + r {
            resid = resid.max(t[(rr, c)].abs());
            t[(rr, c)] = 0.0;
        }
    }
    if resid > 1e3 * f64::EPSILON * scale.max(1.0) * (k as f64) {
        return Err(Error::Solver(format!(
            "Schur block swap lost accuracy (residual {resid:.2e})"
        )));
    }
    // a new 1x1 pair inside a 2x2 slot keeps a clean subdiagonal
    if r == 1 && p == 1 {
        t[(j + 1, j)] = 0.0;
    }
    for (s, sz) in [(j, r), (j + r, p)] {
        if sz == 2 {
            let (l1, _) = block_eigs(t, s, 2);
            if l1.im == 0.0 {
                split_real_pair(t, q, s, l1.re);
            }
        }
    }
    Ok(())
}

/// Real Schur form with all eigenvalues satisfying `select` moved to the top.
pub fn ordered_real_schur(a: &Mat, select: impl Fn(Complex64) -> bool) -> Result<OrderedSchur> {
    let RealSchur { mut q, mut t } = real_schur(a)?;
    let n = t.nrows();
    let mut ks = 0;
    let mut pos = 0;
    while pos < n {
        let sz = if pos + 1 < n && t[(pos + 1, pos)] != 0.0 {
            2
        } else {
            1
        };
        let (lam, _) = block_eigs(&t, pos, sz);
        if select(lam) {
            let mut here = pos;
            while here > ks {
                let prev_sz = if here >= 2 && t[(here - 1, here - 2)] != 0.0 {
                    2
                } else {
                    1
                };
                let prev = here - prev_sz;
                swap_blocks(&mut t, &mut q, prev, prev_sz, sz)?;
                here = prev;
            }
            ks += sz;
        }
        pos += sz;
    }
    Ok(OrderedSchur { q, t, selected: ks })
}
