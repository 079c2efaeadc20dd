//! Dense helpers on top of nalgebra that the pipeline needs in several places.

mod schur;

pub use schur::{ordered_real_schur, real_schur, real_schur_eigs, OrderedSchur, RealSchur};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// diag(-I_n, I_n).
pub fn signature(n: usize) -> Mat {
    signature_split(n, n)
}

/// diag(-I_neg, I_pos).
pub fn signature_split(neg: usize, pos: usize) -> Mat {
    let mut s = Mat::zeros(neg + pos, neg + pos);
    for i in 0..neg {
        s[(i, i)] = -1.0;
    }
    for i in neg..neg + pos {
        s[(i, i)] = 1.0;
    }
    s
}

pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

pub fn asymmetry(a: &Mat) -> f64 {
    (a - a.transpose()).amax()
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn sym_eig(a: &Mat) -> (DVector<f64>, Mat) {
    let n = a.nrows();
    if n == 0 {
        return (DVector::zeros(0), Mat::zeros(0, 0));
    }
    let a = sym(a);
    let (vals, vecs) = checked_sym_eig(&a);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted = DVector::from_iterator(n, idx.iter().map(|&i| vals[i]));
    let mut out = Mat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        out.set_column(k, &vecs.column(i));
    }
    (sorted, out)
}

/// nalgebra's implicit QR occasionally returns a wrong decomposition for
/// matrices with decoupled blocks. A failed residual check is retried in a
/// fixed pseudo-random orthogonal basis, which couples the blocks.
fn checked_sym_eig(a: &Mat) -> (DVector<f64>, Mat) {
    use rand::SeedableRng;
    let n = a.nrows();
    let ok = |vals: &DVector<f64>, vecs: &Mat| {
        let scale = a.amax().max(f64::MIN_POSITIVE);
        let resid = (a * vecs - vecs * Mat::from_diagonal(vals)).amax();
        vals.iter().all(|v| v.is_finite()) && resid <= 1e3 * n as f64 * f64::EPSILON * scale
    };
    let e = SymmetricEigen::new(a.clone());
    if ok(&e.eigenvalues, &e.eigenvectors) || a.iter().any(|x| !x.is_finite()) {
        return (e.eigenvalues, e.eigenvectors);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = (e.eigenvalues, e.eigenvectors);
    for _ in 0..3 {
        let q = full_q(&Mat::from_fn(n, n, |_, _| {
            rand::Rng::gen_range(&mut rng, -1.0..1.0)
        }));
        let e = SymmetricEigen::new(sym(&(q.transpose() * a * &q)));
        let cand = (e.eigenvalues, &q * e.eigenvectors);
        if ok(&cand.0, &cand.1) {
            return cand;
        }
        best = cand;
    }
    best
}

pub fn sym_eigvals(a: &Mat) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = sym(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn lambda_max(a: &Mat) -> f64 {
    sym_eigvals(a).last().copied().unwrap_or(0.0)
}

pub fn lambda_min(a: &Mat) -> f64 {
    sym_eigvals(a).first().copied().unwrap_or(0.0)
}

/// Descending singular values. The SVD does not terminate on non-finite
/// input, so such a matrix yields NaNs.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    if a.iter().any(|x| !x.is_finite()) {
        return vec![f64::NAN; a.nrows().min(a.ncols())];
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Spectral norm.
pub fn norm2(a: &Mat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn cnorm2(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    if a.iter().any(|x| !x.is_finite()) {
        return f64::NAN;
    }
    a.clone().singular_values().max()
}

pub fn cond(a: &Mat) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn rank(a: &Mat, rtol: f64) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > rtol * top).count()
}

/// Orthogonal Q whose first `k = rank(a)` columns span range(a).
/// `a` must have full column rank.
pub fn full_q(a: &Mat) -> Mat {
    let n = a.nrows();
    let mut aug = Mat::zeros(n, a.ncols() + n);
    aug.view_mut((0, 0), (n, a.ncols())).copy_from(a);
    aug.view_mut((0, a.ncols()), (n, n)).fill_with_identity();
    aug.qr().q()
}

/// Orthonormal basis of the null space of `a` (columns), using `tol` as an
/// absolute threshold on singular values.
pub fn null_space(a: &Mat, tol: f64) -> Mat {
    let (r, c) = a.shape();
    if c == 0 {
        return Mat::zeros(0, 0);
    }
    let mut sq = Mat::zeros(r.max(c), c);
    sq.view_mut((0, 0), (r, c)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let cols: Vec<usize> = (0..c).filter(|&i| svd.singular_values[i] <= tol).collect();
    let mut out = Mat::zeros(c, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        out.set_column(k, &vt.row(i).transpose());
    }
    out
}

/// Complex counterpart of [`null_space`]: basis vectors for the `dim`
/// smallest singular values, together with those singular values.
pub fn cnull_space(a: &CMat, dim: usize) -> (CMat, Vec<f64>) {
    let (r, c) = a.shape();
    let mut sq = CMat::zeros(r.max(c), c);
    sq.view_mut((0, 0), (r, c)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut idx: Vec<usize> = (0..c).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let mut out = CMat::zeros(c, dim);
    let mut sv = Vec::with_capacity(dim);
    for (k, &i) in idx.iter().take(dim).enumerate() {
        // rows of V^H are conjugated right singular vectors
        out.set_column(k, &vt.row(i).adjoint());
        sv.push(svd.singular_values[i]);
    }
    (out, sv)
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &Mat, what: &str) -> Result<Mat> {
    nalgebra::Cholesky::new(sym(a))
        .map(|c| c.l())
        .ok_or_else(|| Error::Validation(format!("{what} is not positive definite")))
}

pub fn solve(a: &Mat, b: &Mat) -> Result<Mat> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Solver("singular linear system".into()))
}

pub fn inverse(a: &Mat) -> Result<Mat> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::Solver("singular matrix".into()))
}

pub fn csolve(a: &CMat, b: &CMat) -> Result<CMat> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Solver("singular complex system".into()))
}

pub fn to_complex(a: &Mat) -> CMat {
    a.map(|x| Complex64::new(x, 0.0))
}

pub fn block(a: &Mat, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat {
    a.view((r0, c0), (nr, nc)).into_owned()
}

pub fn select_rows(a: &Mat, rows: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

pub fn select_cols(a: &Mat, cols: &[usize]) -> Mat {
    Mat::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

pub fn permute(a: &Mat, perm: &[usize]) -> Mat {
    Mat::from_fn(perm.len(), perm.len(), |i, j| a[(perm[i], perm[j])])
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Eigenvalues of a general real matrix.
pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    Ok(real_schur(a)?.eigenvalues())
}

/// Logarithmically spaced points, endpoints included.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}
