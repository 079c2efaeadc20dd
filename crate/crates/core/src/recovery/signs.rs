//! Sign characteristics of `S`-self-adjoint matrices.
//!
//! A diagonalizable `S`-self-adjoint matrix with spectrum in the open left
//! half-plane is brought, by a `T` with `T^T S T = diag(-I, I)`, to
//!
//! ```text
//! [ 0    0    0    V ]      c   complex-pair coordinates (S-negative)
//! [ 0    L-   0    0 ]      k1  real eigenvalues with v^T S v < 0
//! [ 0    0    L+   0 ]      k2  real eigenvalues with v^T S v > 0
//! [ -V   0    0    E ]      c   complex-pair coordinates (S-positive)
//! ```
//!
//! with `V`, `E`, `L-`, `L+` diagonal. Real eigenvectors are normalized to
//! `|v^T S v| = 1`; a complex eigenvector `w = x + i y` is normalized to
//! `w^T S w = 2`, so that `[y, x]` has Gram matrix `diag(-1, 1)` and carries
//! the block `[[s, -t], [t, s]]`. A hyperbolic rotation then zeroes its
//! leading entry.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat};
use crate::tolerances;

#[derive(Debug, Clone, Copy)]
pub struct SignTol {
    /// Eigenvalues closer than `cluster * max(||A||, 1)` are one eigenvalue.
    pub cluster: f64,
    /// `|v^T S v|` below this (for unit `v`) is a degenerate sign.
    pub degenerate: f64,
    /// Largest admissible condition number of the eigenvector basis.
    pub max_cond: f64,
}

impl Default for SignTol {
    fn default() -> Self {
        Self {
            cluster: 1e-9,
            degenerate: tolerances::SIGN_DEGENERATE,
            max_cond: tolerances::EIGVEC_COND,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TypedEigen {
    pub lambda: f64,
    /// `sign(v^T S v)`.
    pub sign: i8,
    #[serde(skip)]
    pub vector: DVector<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexPair {
    pub sigma: f64,
    pub tau: f64,
    /// Off-diagonal entry of the reduced block `[[0, nu], [-nu, eta]]`.
    pub nu: f64,
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct SignTypedEigen {
    /// S-negative real eigenvalues first, each group ascending.
    pub real_eigs: Vec<TypedEigen>,
    pub complex_pairs: Vec<ComplexPair>,
    /// Columns ordered as in the module docs.
    pub t: Mat,
    pub cond: f64,
}

impl SignTypedEigen {
    pub fn negative(&self) -> Vec<f64> {
        self.real_eigs
            .iter()
            .filter(|e| e.sign < 0)
            .map(|e| e.lambda)
            .collect()
    }

    pub fn positive(&self) -> Vec<f64> {
        self.real_eigs
            .iter()
            .filter(|e| e.sign > 0)
            .map(|e| e.lambda)
            .collect()
    }

    /// Sizes `(c, k1, k2)`.
    pub fn layout(&self) -> (usize, usize, usize) {
        (
            self.complex_pairs.len(),
            self.negative().len(),
            self.positive().len(),
        )
    }

    /// `diag(-I_{c+k1}, I_{k2+c})`.
    pub fn signature(&self) -> Mat {
        let (c, k1, k2) = self.layout();
        linalg::signature_split(c + k1, k2 + c)
    }

    /// The target matrix `T^-1 A T` in exact form.
    pub fn canonical(&self) -> Mat {
        let (c, k1, k2) = self.layout();
        let n = 2 * c + k1 + k2;
        let mut out = Mat::zeros(n, n);
        for (i, e) in self.real_eigs.iter().enumerate() {
            out[(c + i, c + i)] = e.lambda;
        }
        for (i, p) in self.complex_pairs.iter().enumerate() {
            let (top, bot) = (i, n - c + i);
            out[(top, bot)] = p.nu;
            out[(bot, top)] = -p.nu;
            out[(bot, bot)] = p.eta;
        }
        out
    }
}

/// 2x2 congruence for a complex pair in the form `[[s, t], [-t, s]]` with
/// Gram matrix `J = [[0, 1], [1, 0]]`.
#[derive(Debug, Clone)]
pub struct ThetaBlock {
    pub theta: Mat,
    pub nu: f64,
    pub eta: f64,
}

/// `H(x) = [[cosh x, sinh x], [sinh x, cosh x]]`, which preserves `diag(-1, 1)`.
fn hyperbolic(x: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[x.cosh(), x.sinh(), x.sinh(), x.cosh()])
}

/// Rotation taking `[[s, -t], [t, s]]` (Gram `diag(-1, 1)`) to `[[0, nu], [-nu, eta]]`.
fn zeroing_rotation(sigma: f64, tau: f64) -> (Mat, f64, f64) {
    // (1,1) entry after the rotation is sigma - tau sinh(2x)
    let x = 0.5 * (sigma / tau).asinh();
    (hyperbolic(x), -tau * (2.0 * x).cosh(), 2.0 * sigma)
}

/// `Theta` with `Theta^T J Theta = diag(-1, 1)` and a zero leading entry in
/// `Theta^-1 [[s, t], [-t, s]] Theta`. Requires `tau > 0`.
pub fn theta_block(sigma: f64, tau: f64) -> ThetaBlock {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // K^T J K = diag(-1, 1) and K^-1 [[s, t], [-t, s]] K = [[s, -t], [t, s]]
    let k = Mat::from_row_slice(2, 2, &[-r, r, r, r]);
    let (h, nu, eta) = zeroing_rotation(sigma, tau);
    ThetaBlock {
        theta: k * h,
        nu,
        eta,
    }
}

struct Cluster {
    value: Complex64,
    mult: usize,
}

fn clusters(eigs: &[Complex64], tol: f64) -> Vec<Cluster> {
    let mut pending: Vec<Complex64> = eigs.iter().filter(|l| l.im >= -tol).copied().collect();
    pending.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for l in pending {
        let l = if l.im.abs() <= tol {
            Complex64::new(l.re, 0.0)
        } else {
            l
        };
        match out.iter_mut().find(|(v, _)| (*v - l).norm() <= tol) {
            Some((v, k)) => {
                *v = (*v * *k as f64 + l) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => out.push((l, 1)),
        }
    }
    out.into_iter()
        .map(|(value, mult)| Cluster { value, mult })
        .collect()
}

/// Real eigenvectors of a real cluster, S-normalized and typed.
fn real_cluster(
    s: &Mat,
    a: &Mat,
    lambda: f64,
    mult: usize,
    tol: &SignTol,
) -> Result<Vec<TypedEigen>> {
    let n = a.nrows();
    let shifted = a - Mat::identity(n, n) * lambda;
    let v = smallest_right_vectors(&shifted, mult);
    let gram = linalg::sym(&(v.transpose() * s * &v));
    let (vals, vecs) = linalg::sym_eig(&gram);
    let mut out = Vec::with_capacity(mult);
    for (i, &g) in vals.iter().enumerate() {
        if g.abs() <= tol.degenerate {
            return Err(Error::Structure(format!(
                "eigenvalue {lambda:.6e} has a degenerate sign (|v^T S v| = {:.2e}); non-semi-simple or mixed type",
                g.abs()
            )));
        }
        let w = &v * vecs.column(i) / g.abs().sqrt();
        out.push(TypedEigen {
            lambda,
            sign: if g < 0.0 { -1 } else { 1 },
            vector: w,
        });
    }
    Ok(out)
}

/// Right singular vectors of the `k` smallest singular values.
fn smallest_right_vectors(a: &Mat, k: usize) -> Mat {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    Mat::from_fn(a.ncols(), k, |i, j| vt[(idx[j], i)])
}

/// Complex eigenvectors with `w^T S w = 2` and `w_i^T S w_j = 0`.
fn complex_cluster(
    s: &Mat,
    a: &Mat,
    lambda: Complex64,
    mult: usize,
    tol: &SignTol,
) -> Result<Vec<DVector<Complex64>>> {
    let n = a.nrows();
    let shifted = CMat::from_fn(n, n, |i, j| {
        let d = if i == j {
            lambda
        } else {
            Complex64::new(0.0, 0.0)
        };
        Complex64::new(a[(i, j)], 0.0) - d
    });
    let (basis, _) = linalg::cnull_space(&shifted, mult);
    let sc = linalg::to_complex(s);
    let bil = |x: &DVector<Complex64>, y: &DVector<Complex64>| (x.transpose() * &sc * y)[(0, 0)];
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(mult);
    for j in 0..mult {
        let mut w = basis.column(j).into_owned();
        for u in &out {
            let c = bil(u, &w) / Complex64::new(2.0, 0.0);
            w -= u * c;
        }
        let g = bil(&w, &w);
        if g.norm() <= tol.degenerate * w.norm_squared() {
            return Err(Error::Structure(format!(
                "complex eigenvalue {:.4e}{:+.4e}i has an S-isotropic eigenvector",
                lambda.re, lambda.im
            )));
        }
        w *= (Complex64::new(2.0, 0.0) / g).sqrt();
        out.push(w);
    }
    Ok(out)
}

/// Canonical form of `(S, A)` for diagonalizable `A` with `Re(lambda) < 0`.
pub fn sign_typed_diagonalize(s: &Mat, a: &Mat, tol: &SignTol) -> Result<SignTypedEigen> {
    let n = a.nrows();
    let anorm = linalg::norm2(a).max(1.0);
    let defect = (s * a - a.transpose() * s).amax();
    if defect > 1e-8 * anorm {
        return Err(Error::Structure(format!(
            "matrix is not S-self-adjoint (defect {defect:.2e})"
        )));
    }
    if n == 0 {
        return Ok(SignTypedEigen {
            real_eigs: Vec::new(),
            complex_pairs: Vec::new(),
            t: Mat::zeros(0, 0),
            cond: 1.0,
        });
    }
    let eigs = linalg::eigenvalues(a)?;
    let mut reals: Vec<TypedEigen> = Vec::new();
    let mut pairs: Vec<(ComplexPair, DVector<f64>, DVector<f64>)> = Vec::new();
    for cl in clusters(&eigs, tol.cluster * anorm) {
        if cl.value.im == 0.0 {
            reals.extend(real_cluster(s, a, cl.value.re, cl.mult, tol)?);
        } else {
            for w in complex_cluster(s, a, cl.value, cl.mult, tol)? {
                let x = w.map(|z| z.re);
                let y = w.map(|z| z.im);
                let (h, nu, eta) = zeroing_rotation(cl.value.re, cl.value.im);
                let top = &y * h[(0, 0)] + &x * h[(1, 0)];
                let bot = &y * h[(0, 1)] + &x * h[(1, 1)];
                pairs.push((
                    ComplexPair {
                        sigma: cl.value.re,
                        tau: cl.value.im,
                        nu,
                        eta,
                    },
                    top,
                    bot,
                ));
            }
        }
    }
    let count: usize = reals.len() + 2 * pairs.len();
    if count != n {
        return Err(Error::Structure(format!(
            "found {count} eigenvectors for a matrix of order {n}"
        )));
    }
    reals.sort_by(|x, y| x.sign.cmp(&y.sign).then(x.lambda.total_cmp(&y.lambda)));
    let c = pairs.len();
    let mut t = Mat::zeros(n, n);
    for (i, (_, top, bot)) in pairs.iter().enumerate() {
        t.set_column(i, top);
        t.set_column(n - c + i, bot);
    }
    for (i, e) in reals.iter().enumerate() {
        t.set_column(c + i, &e.vector);
    }
    let cond = linalg::cond(&t);
    if cond.is_nan() || cond > tol.max_cond {
        return Err(Error::Structure(format!(
            "eigenvector basis condition number {cond:.2e} exceeds {:.0e}; the matrix is not safely diagonalizable \
             (non-semi-simple zeros are not repaired)",
            tol.max_cond
        )));
    }
    Ok(SignTypedEigen {
        real_eigs: reals,
        complex_pairs: pairs.into_iter().map(|(p, _, _)| p).collect(),
        t,
        cond,
    })
}
