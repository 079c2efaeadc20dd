//! Orthogonal reduction of `[[0, G^T], [-G, -D]]`, `[0; B]` to the block form
//!
//! ```text
//! G = [ 0    0    G13 ]    D = [ D11   0  D13 ]    B = [ 0  ]
//!     [ 0    G22  0   ]        [ 0     0  0   ]        [ 0  ]
//!     [ G31  G32  G33 ]        [ D13^T 0  D33 ]        [ B3 ]
//! ```
//!
//! with top coordinates ordered `(m, l, q)` and bottom coordinates ordered
//! `(q, l, m)`. The `l` pairs carry the undamped imaginary-axis zeros; the
//! `m` pairs carry the zeros at the origin. Every solution of the KYP
//! inequality is the identity on those `2(m + l)` coordinates, so only the
//! `2q`-dimensional zero dynamics remain to be solved for.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

#[derive(Debug, Clone)]
pub struct ZeroCharForm {
    /// Orthogonal transform of the top half.
    pub t1: Mat,
    /// Orthogonal transform of the bottom half.
    pub t2: Mat,
    pub m: usize,
    pub l: usize,
    pub q: usize,
    /// Transformed blocks `T2^T G T1`, `T2^T D T2`, `T2^T B`.
    pub g: Mat,
    pub d: Mat,
    pub b: Mat,
    /// Largest entry that the block pattern requires to vanish, relative.
    pub pattern_defect: f64,
}

impl ZeroCharForm {
    pub fn compute(g: &Mat, d: &Mat, b: &Mat, cluster_tol: f64, kernel_tol: f64) -> Result<Self> {
        let n = g.nrows();
        let m = b.ncols();
        if m > n {
            return Err(Error::Structure(format!("{m} inputs exceed {n} positions")));
        }
        let nm = n - m;

        // range(B) into the last m bottom coordinates
        let qb = linalg::full_q(b);
        let t2a = reorder_cols(&qb, m);

        // top coordinates: null space of the first n-m rows of T2^T G go first
        let w = t2a.columns(0, nm).transpose() * g;
        let t1a = if nm > 0 {
            reorder_cols(&linalg::full_q(&w.transpose()), nm)
        } else {
            Mat::identity(n, n)
        };

        let g1 = t2a.transpose() * g * &t1a;
        let d1 = t2a.transpose() * d * &t2a;
        let g12 = linalg::block(&g1, 0, m, nm, nm);
        let d11 = linalg::block(&d1, 0, 0, nm, nm);

        let (xt, xb, l) = if nm > 0 {
            split_undamped(&g12, &d11, cluster_tol, kernel_tol)?
        } else {
            (Mat::zeros(0, 0), Mat::zeros(0, 0), 0)
        };
        let t1 = &t1a * linalg::block_diag(&[&Mat::identity(m, m), &xt]);
        let t2 = &t2a * linalg::block_diag(&[&xb, &Mat::identity(m, m)]);
        let gt = t2.transpose() * g * &t1;
        let dt = linalg::sym(&(t2.transpose() * d * &t2));
        let bt = t2.transpose() * b;
        let q = nm - l;

        let gs = gt.amax().max(f64::MIN_POSITIVE);
        let ds = dt.amax().max(f64::MIN_POSITIVE);
        let bs = bt.amax().max(f64::MIN_POSITIVE);
        let mut defect: f64 = 0.0;
        // rows q (bottom), cols m and l (top)
        defect = defect.max(gt.view((0, 0), (q, m + l)).amax() / gs);
        // rows l (bottom): only G22
        defect = defect.max(gt.view((q, 0), (l, m)).amax() / gs);
        defect = defect.max(gt.view((q, m + l), (l, q)).amax() / gs);
        defect = defect.max(dt.view((q, 0), (l, n)).amax() / ds);
        defect = defect.max(bt.view((0, 0), (nm, m)).amax() / bs);

        Ok(Self {
            t1,
            t2,
            m,
            l,
            q,
            g: gt,
            d: dt,
            b: bt,
            pattern_defect: defect,
        })
    }

    /// Zero dynamics `Az = [[0, G13^T], [-G13, -D11]]` and its input
    /// coupling `Bz = [G33^T; -D13]`, together with the feedthrough block `D33`.
    pub fn zero_dynamics(&self) -> (Mat, Mat, Mat) {
        let (m, l, q) = (self.m, self.l, self.q);
        let g13 = linalg::block(&self.g, 0, m + l, q, q);
        let d11 = linalg::block(&self.d, 0, 0, q, q);
        let g33 = linalg::block(&self.g, q + l, m + l, m, q);
        let d13 = linalg::block(&self.d, 0, q + l, q, m);
        let d33 = linalg::block(&self.d, q + l, q + l, m, m);
        let mut az = Mat::zeros(2 * q, 2 * q);
        az.view_mut((0, q), (q, q)).copy_from(&g13.transpose());
        az.view_mut((q, 0), (q, q)).copy_from(&(-g13));
        az.view_mut((q, q), (q, q)).copy_from(&(-d11));
        let mut bz = Mat::zeros(2 * q, m);
        bz.view_mut((0, 0), (q, m)).copy_from(&g33.transpose());
        bz.view_mut((q, 0), (q, m)).copy_from(&(-d13));
        (az, bz, d33)
    }

    /// State transform `diag(T1, T2)` of the full first-order system.
    pub fn transform(&self) -> Mat {
        linalg::block_diag(&[&self.t1, &self.t2])
    }
}

/// Move the first `k` columns to the end.
fn reorder_cols(q: &Mat, k: usize) -> Mat {
    let n = q.ncols();
    let order: Vec<usize> = (k..n).chain(0..k).collect();
    linalg::select_cols(q, &order)
}

/// Rotate the middle coordinates so that `G12` becomes diagonal and the
/// undamped oscillators separate. Returns the top and bottom transforms
/// (top ordered `(l, q)`, bottom ordered `(q, l)`) and `l`.
fn split_undamped(
    g12: &Mat,
    d11: &Mat,
    cluster_tol: f64,
    kernel_tol: f64,
) -> Result<(Mat, Mat, usize)> {
    let k = g12.nrows();
    let svd = g12.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let v = svd.v_t.expect("requested").transpose();
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let u = linalg::select_cols(&u, &order);
    let v = linalg::select_cols(&v, &order);
    let s: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    if s[k - 1] <= 1e-14 * s[0] {
        return Err(Error::Structure("stiffness coupling is singular".into()));
    }
    let du = linalg::sym(&(u.transpose() * d11 * &u));
    let dscale = linalg::norm2(d11).max(f64::MIN_POSITIVE);

    let mut rot = Mat::zeros(k, k);
    let mut damped = Vec::new();
    let mut undamped = Vec::new();
    let mut i = 0;
    while i < k {
        let mut j = i + 1;
        while j < k && (s[j - 1] - s[j]).abs() <= cluster_tol * s[0] {
            j += 1;
        }
        let idx: Vec<usize> = (i..j).collect();
        let dc = linalg::permute(&du, &idx);
        let (vals, vecs) = linalg::sym_eig(&dc);
        for (c, &val) in vals.iter().enumerate() {
            let target = if val <= kernel_tol * dscale {
                &mut undamped
            } else {
                &mut damped
            };
            let mut full = nalgebra::DVector::zeros(k);
            for (r, &row) in idx.iter().enumerate() {
                full[row] = vecs[(r, c)];
            }
            target.push(full);
        }
        i = j;
    }
    let q = damped.len();
    let l = undamped.len();
    // bottom middle: (q, l); top middle: (l, q)
    for (c, vcol) in damped.iter().chain(undamped.iter()).enumerate() {
        rot.set_column(c, vcol);
    }
    let xb = &u * &rot;
    let mut rot_top = Mat::zeros(k, k);
    for (c, vcol) in undamped.iter().chain(damped.iter()).enumerate() {
        rot_top.set_column(c, vcol);
    }
    let xt = &v * &rot_top;
    debug_assert_eq!(q + l, k);
    Ok((xt, xb, l))
}
