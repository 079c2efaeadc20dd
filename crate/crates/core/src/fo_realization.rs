//! Signature-symmetric first-order realizations.
//!
//! With `M = H H^T` and `K = G G^T` the state `x = [G^T H^-T p; H^T p']`
//! turns the second-order system into
//!
//! ```text
//! A = [ 0        G^T H^-T    ]     B = [ 0      ]     C = B^T
//!     [ -H^-1 G  -H^-1 D H^-T ]         [ H^-1 B ]
//! ```
//!
//! which satisfies `S A S = A^T` and `A + A^T <= 0` for `S = diag(-I, I)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat};
use crate::so_model::SecondOrderSystem;

/// `[A, B, C]` of order `2n` with the block pattern above.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredFirstOrder {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
}

impl StructuredFirstOrder {
    /// Assemble `[[0, G^T], [-G, -D]]`, `[0; B]`.
    pub fn from_blocks(g: &Mat, d: &Mat, b2: &Mat) -> Self {
        let n = g.nrows();
        let mut a = Mat::zeros(2 * n, 2 * n);
        a.view_mut((0, n), (n, n)).copy_from(&g.transpose());
        a.view_mut((n, 0), (n, n)).copy_from(&(-g));
        a.view_mut((n, n), (n, n)).copy_from(&(-d));
        let mut b = Mat::zeros(2 * n, b2.ncols());
        b.view_mut((n, 0), b2.shape()).copy_from(b2);
        let c = b.transpose();
        Self { a, b, c }
    }

    /// Half the state dimension.
    pub fn n(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    /// The coupling block `G` in `A = [[0, G^T], [-G, -D]]`.
    pub fn g_block(&self) -> Mat {
        let n = self.n();
        -linalg::block(&self.a, n, 0, n, n)
    }

    /// The damping block `D` in `A = [[0, G^T], [-G, -D]]`.
    pub fn d_block(&self) -> Mat {
        let n = self.n();
        -linalg::block(&self.a, n, n, n, n)
    }

    /// Input block of `B` (its top half is zero).
    pub fn b_block(&self) -> Mat {
        let n = self.n();
        linalg::block(&self.b, n, 0, n, self.inputs())
    }

    /// The dual realization `[A^T, C^T, B^T]`, again structured with `G -> -G`.
    pub fn dual(&self) -> Self {
        Self {
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
        }
    }

    /// Largest deviations from the structural identities, relative to the
    /// norms involved: `(S A S - A^T, top block of B, C - B^T, lambda_max(A + A^T))`.
    pub fn structure_defects(&self) -> StructureDefects {
        let n = self.n();
        let s = linalg::signature(n);
        let scale_a = self.a.amax().max(f64::MIN_POSITIVE);
        let scale_b = self.b.amax().max(f64::MIN_POSITIVE);
        StructureDefects {
            self_adjoint: (&s * &self.a * &s - self.a.transpose()).amax() / scale_a,
            top_of_b: self.b.rows(0, n).amax() / scale_b,
            output: (&self.c - self.b.transpose()).amax() / scale_b,
            dissipation: linalg::lambda_max(&(&self.a + self.a.transpose())) / scale_a,
        }
    }

    pub fn check_structure(&self, tol: f64) -> Result<()> {
        let d = self.structure_defects();
        let worst = d
            .self_adjoint
            .max(d.top_of_b)
            .max(d.output)
            .max(d.dissipation);
        if worst > tol {
            return Err(Error::Structure(format!(
                "first-order structure violated: {d:?}"
            )));
        }
        Ok(())
    }

    pub fn transfer_function(&self, s: Complex64) -> Result<CMat> {
        let n2 = self.a.nrows();
        let lhs = CMat::from_fn(n2, n2, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let x = linalg::csolve(&lhs, &linalg::to_complex(&self.b))?;
        Ok(linalg::to_complex(&self.c) * x)
    }

    pub fn sigma_max(&self, omegas: &[f64]) -> Result<Vec<f64>> {
        omegas
            .iter()
            .map(|&w| {
                Ok(linalg::cnorm2(
                    &self.transfer_function(Complex64::new(0.0, w))?,
                ))
            })
            .collect()
    }

    /// `W(P) = [[A^T P + P A, P B - C^T], [B^T P - C, 0]]`.
    pub fn kyp_matrix(&self, p: &Mat) -> Mat {
        kyp_matrix(&self.a, &self.b, &self.c, p)
    }

    pub fn kyp_residual(&self, p: &Mat) -> KypResidual {
        let w = self.kyp_matrix(p);
        KypResidual {
            lmi_max_eig: linalg::lambda_max(&w),
            coupling_norm: linalg::norm2(&(p * &self.b - self.c.transpose())),
        }
    }

    /// Invariant zeros with multiplicities.
    pub fn zeros(&self, tol: &ZeroTol) -> Result<ZeroList> {
        system_zeros(&self.a, &self.b, &self.c, tol)
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct StructureDefects {
    pub self_adjoint: f64,
    pub top_of_b: f64,
    pub output: f64,
    pub dissipation: f64,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct KypResidual {
    pub lmi_max_eig: f64,
    pub coupling_norm: f64,
}

pub fn kyp_matrix(a: &Mat, b: &Mat, c: &Mat, p: &Mat) -> Mat {
    let n = a.nrows();
    let m = b.ncols();
    let mut w = Mat::zeros(n + m, n + m);
    w.view_mut((0, 0), (n, n))
        .copy_from(&(a.transpose() * p + p * a));
    let pb = p * b - c.transpose();
    w.view_mut((0, n), (n, m)).copy_from(&pb);
    w.view_mut((n, 0), (m, n)).copy_from(&pb.transpose());
    w
}

/// Lift to the structured first-order form.
pub fn lift(sys: &SecondOrderSystem) -> Result<StructuredFirstOrder> {
    let h = linalg::cholesky(&sys.m, "M")?;
    let gk = linalg::cholesky(&sys.k, "K")?;
    let solve = |rhs: &Mat| {
        h.solve_lower_triangular(rhs)
            .ok_or_else(|| Error::Solver("singular Cholesky factor of M".into()))
    };
    let g = solve(&gk)?;
    let hd = solve(&sys.d)?;
    let d = linalg::sym(&solve(&hd.transpose())?);
    let b = solve(&sys.b)?;
    Ok(StructuredFirstOrder::from_blocks(&g, &d, &b))
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroTol {
    /// Zeros closer than `cluster * max(1, ||A||)` are merged.
    pub cluster: f64,
    /// Multiplier on `sigma_max * (2n + m) * eps` for the rank test.
    pub rank_factor: f64,
}

impl Default for ZeroTol {
    fn default() -> Self {
        Self {
            cluster: 1e-6,
            rank_factor: 1e3,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Zero {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub semi_simple: bool,
}

impl Zero {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ZeroList {
    pub zeros: Vec<Zero>,
    /// Eigenvalues of the pencil discarded as infinite.
    pub infinite: usize,
}

impl ZeroList {
    /// Zeros repeated by multiplicity.
    pub fn values(&self) -> Vec<Complex64> {
        self.zeros
            .iter()
            .flat_map(|z| std::iter::repeat_n(z.value(), z.multiplicity))
            .collect()
    }

    pub fn multiplicity_at(&self, s: Complex64, tol: f64) -> usize {
        self.zeros
            .iter()
            .filter(|z| (z.value() - s).norm() <= tol)
            .map(|z| z.multiplicity)
            .sum()
    }
}

/// Finite generalized eigenvalues of `[[A, B], [C, 0]] - s diag(I, 0)`.
///
/// The pencil is mapped to a standard eigenproblem by the shift-invert
/// transformation `theta = 1 / (s - s0)`; infinite eigenvalues land at
/// `theta = 0`. They form Jordan chains (length 2 for relative degree one),
/// so rounding moves them to `|theta| ~ sqrt(eps) ||op||`; anything below
/// `1e3 sqrt(eps) ||op||` counts as infinite.
pub fn system_zeros(a: &Mat, b: &Mat, c: &Mat, tol: &ZeroTol) -> Result<ZeroList> {
    let n = a.nrows();
    let m = b.ncols();
    let big = n + m;
    let mut pen = Mat::zeros(big, big);
    pen.view_mut((0, 0), (n, n)).copy_from(a);
    pen.view_mut((0, n), (n, m)).copy_from(b);
    pen.view_mut((n, 0), (m, n)).copy_from(c);
    let scale = linalg::norm2(&pen).max(1.0);

    let mut last_err = None;
    for shift in [0.73, 1.37, 2.91, -0.61] {
        let s0 = shift * scale;
        let mut shifted = pen.clone();
        for i in 0..n {
            shifted[(i, i)] -= s0;
        }
        let lu = shifted.lu();
        let mut e = Mat::zeros(big, big);
        e.view_mut((0, 0), (n, n)).fill_with_identity();
        let op = match lu.solve(&e) {
            Some(op) if op.iter().all(|x| x.is_finite()) => op,
            _ => {
                last_err = Some(Error::Solver("shifted zero pencil is singular".into()));
                continue;
            }
        };
        let thetas = linalg::eigenvalues(&op)?;
        let theta_floor = 1e3 * f64::EPSILON.sqrt() * linalg::norm2(&op);
        let mut finite = Vec::new();
        let mut infinite = 0;
        for th in thetas {
            if th.norm() <= theta_floor {
                infinite += 1;
            } else {
                finite.push(Complex64::new(s0, 0.0) + th.inv());
            }
        }
        let clusters = cluster_values(&finite, tol.cluster * scale);
        let rank_tol_base = (big as f64) * f64::EPSILON * tol.rank_factor;
        let mut zeros = Vec::with_capacity(clusters.len());
        for (value, multiplicity) in clusters {
            let semi_simple = if multiplicity == 1 {
                true
            } else {
                let at = CMat::from_fn(big, big, |i, j| {
                    let mut x = Complex64::new(pen[(i, j)], 0.0);
                    if i == j && i < n {
                        x -= value;
                    }
                    x
                });
                let (_, sv) = linalg::cnull_space(&at, multiplicity);
                let smax = linalg::cnorm2(&at);
                sv.iter().all(|&x| x <= rank_tol_base * smax)
            };
            zeros.push(Zero {
                re: value.re,
                im: value.im,
                multiplicity,
                semi_simple,
            });
        }
        zeros.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        return Ok(ZeroList { zeros, infinite });
    }
    Err(last_err.unwrap_or_else(|| Error::Solver("zero computation failed".into())))
}

/// Group values within `tol`, returning cluster means and sizes. Conjugate
/// symmetry of the input is kept by forcing near-real means onto the axis.
fn cluster_values(vals: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut used = vec![false; vals.len()];
    let mut out = Vec::new();
    for i in 0..vals.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![i];
        used[i] = true;
        let mut k = 0;
        while k < members.len() {
            let v = vals[members[k]];
            for j in 0..vals.len() {
                if !used[j] && (vals[j] - v).norm() <= tol {
                    used[j] = true;
                    members.push(j);
                }
            }
            k += 1;
        }
        let mut mean = members.iter().map(|&j| vals[j]).sum::<Complex64>() / members.len() as f64;
        if mean.im.abs() <= tol {
            mean.im = 0.0;
        }
        out.push((mean, members.len()));
    }
    out
}

/// Coefficients `(M, D, K)` of the quadratic polynomial generated by the
/// standard triple `(X, Z, Y)`, read off from the moments `X Z^j Y`.
pub fn moments_reconstruct(x: &Mat, z: &Mat, y: &Mat) -> Result<(Mat, Mat, Mat)> {
    let xy = x * y;
    let scale = (linalg::norm2(x) * linalg::norm2(y)).max(f64::MIN_POSITIVE);
    if xy.amax() > 1e-8 * scale {
        return Err(Error::Structure(format!(
            "not a standard triple: ||X Y|| = {:.3e}",
            xy.amax()
        )));
    }
    let zy = z * y;
    let g1 = x * &zy;
    let z2y = z * &zy;
    let g2 = x * &z2y;
    let g3 = x * (z * &z2y);
    let m = linalg::inverse(&g1)
        .map_err(|_| Error::Structure("not a standard triple: X Z Y is singular".into()))?;
    let d = -(&m * &g2 * &m);
    let k = -(&m * &g3 * &m) + &d * &g1 * &d;
    Ok((m, d, k))
}
