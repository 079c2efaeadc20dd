//! Minimal solutions of KYP inequalities in Popov form
//!
//! ```text
//! [ A^T P + P A + Q   P B + S ]
//! [ B^T P + S^T       -R      ]  <= 0,      R = R^T >= 0.
//! ```
//!
//! A singular `R` forces `P B0 = -S0` on its kernel. That affine constraint
//! fixes part of `P`, and the remaining free block satisfies a smaller
//! inequality of the same form, so the reduction recurses. A definite `R`
//! ends in the Riccati equation
//! `A^T P + P A + Q + (P B + S) R^-1 (B^T P + S^T) = 0`, whose stabilizing
//! solution (closed loop `A + B R^-1 (B^T P + S^T)` Hurwitz) is the minimal one.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

#[derive(Debug, Clone)]
pub struct Popov {
    pub a: Mat,
    pub b: Mat,
    pub s: Mat,
    pub q: Mat,
    pub r: Mat,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PopovStats {
    /// Deflation steps taken before the Riccati equation.
    pub deflations: usize,
    /// Smallest |Re| of the Hamiltonian eigenvalues, relative to its norm.
    pub hamiltonian_gap: f64,
    /// Spectral abscissa of the closed loop (negative for the minimal solution).
    pub closed_loop_abscissa: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PopovTol {
    /// Eigenvalues of `R` below `singular * scale` count as zero.
    pub singular: f64,
    /// Hamiltonian eigenvalues with `|Re| <= imag_axis * ||H||` are rejected.
    pub imag_axis: f64,
}

impl Default for PopovTol {
    fn default() -> Self {
        Self {
            singular: 1e-10,
            imag_axis: 1e-11,
        }
    }
}

impl Popov {
    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    /// Largest eigenvalue of the Popov matrix at `p`.
    pub fn lmi_max_eig(&self, p: &Mat) -> f64 {
        let n = self.states();
        let m = self.inputs();
        let mut w = Mat::zeros(n + m, n + m);
        w.view_mut((0, 0), (n, n))
            .copy_from(&(self.a.transpose() * p + p * &self.a + &self.q));
        let c = p * &self.b + &self.s;
        w.view_mut((0, n), (n, m)).copy_from(&c);
        w.view_mut((n, 0), (m, n)).copy_from(&c.transpose());
        w.view_mut((n, n), (m, m)).copy_from(&(-&self.r));
        linalg::lambda_max(&w)
    }

    fn scale(&self) -> f64 {
        [
            linalg::norm2(&self.a),
            linalg::norm2(&self.b),
            linalg::norm2(&self.s),
            linalg::norm2(&self.r),
        ]
        .into_iter()
        .fold(f64::MIN_POSITIVE, f64::max)
    }

    pub fn minimal_solution(&self, tol: &PopovTol) -> Result<(Mat, PopovStats)> {
        let n = self.states();
        let m = self.inputs();
        if n == 0 {
            return Ok((Mat::zeros(0, 0), PopovStats::default()));
        }
        if m == 0 {
            return riccati(self, tol);
        }
        let (vals, vecs) = linalg::sym_eig(&self.r);
        let scale = self.scale();
        let thr = tol.singular * scale * scale.max(1.0);
        if vals[0] < -thr {
            return Err(Error::Solver(format!(
                "KYP inequality infeasible: feedthrough term has eigenvalue {:.3e}",
                vals[0]
            )));
        }
        let null: Vec<usize> = (0..m).filter(|&i| vals[i] <= thr).collect();
        if null.is_empty() {
            return riccati(self, tol);
        }
        let def: Vec<usize> = (0..m).filter(|&i| vals[i] > thr).collect();
        let v0 = linalg::select_cols(&vecs, &null);
        let v1 = linalg::select_cols(&vecs, &def);
        let lam1: Vec<f64> = def.iter().map(|&i| vals[i]).collect();

        // constraint P B0 = -S0, restricted to directions where B0 acts
        let b0 = &self.b * &v0;
        let s0 = &self.s * &v0;
        let (b0, s0) = prune_constraint(&b0, &s0, scale)?;
        let k = b0.ncols();
        if k == 0 {
            let reduced = Popov {
                a: self.a.clone(),
                b: &self.b * &v1,
                s: &self.s * &v1,
                q: self.q.clone(),
                r: Mat::from_diagonal(&nalgebra::DVector::from_vec(lam1)),
            };
            let (p, mut st) = reduced.minimal_solution(tol)?;
            st.deflations += 1;
            return Ok((p, st));
        }

        let qc = linalg::full_q(&b0);
        let rb = qc.columns(0, k).transpose() * &b0;
        let rbinv = linalg::inverse(&rb)?;
        let f = -(qc.transpose() * &s0 * rbinv);
        let fb = f.rows(0, k).into_owned();
        let asym = linalg::asymmetry(&fb);
        if asym > 1e-6 * fb.amax().max(1.0) {
            return Err(Error::Solver(format!(
                "KYP inequality infeasible: forced block is not symmetric ({asym:.3e})"
            )));
        }
        let fb = linalg::sym(&fb);
        let fnb = f.rows(k, n - k).into_owned();
        let mut p0 = Mat::zeros(n, n);
        p0.view_mut((0, 0), (k, k)).copy_from(&fb);
        p0.view_mut((k, 0), (n - k, k)).copy_from(&fnb);
        p0.view_mut((0, k), (k, n - k)).copy_from(&fnb.transpose());

        let ah = qc.transpose() * &self.a * &qc;
        let b1 = qc.transpose() * &self.b * &v1;
        let s1 = qc.transpose() * &self.s * &v1;
        let qh = qc.transpose() * &self.q * &qc;
        let c0 = ah.transpose() * &p0 + &p0 * &ah + qh;
        let e1 = &p0 * &b1 + s1;
        let k1 = v1.ncols();
        let nn = n - k;

        let mut bn = Mat::zeros(nn, k + k1);
        bn.view_mut((0, 0), (nn, k))
            .copy_from(&ah.view((k, 0), (nn, k)));
        bn.view_mut((0, k), (nn, k1))
            .copy_from(&b1.view((k, 0), (nn, k1)));
        let mut sn = Mat::zeros(nn, k + k1);
        sn.view_mut((0, 0), (nn, k))
            .copy_from(&c0.view((k, 0), (nn, k)));
        sn.view_mut((0, k), (nn, k1))
            .copy_from(&e1.view((k, 0), (nn, k1)));
        let mut rn = Mat::zeros(k + k1, k + k1);
        rn.view_mut((0, 0), (k, k))
            .copy_from(&(-c0.view((0, 0), (k, k))));
        rn.view_mut((0, k), (k, k1))
            .copy_from(&(-e1.view((0, 0), (k, k1))));
        rn.view_mut((k, 0), (k1, k))
            .copy_from(&(-e1.view((0, 0), (k, k1)).transpose()));
        for (i, &l) in lam1.iter().enumerate() {
            rn[(k + i, k + i)] = l;
        }
        let reduced = Popov {
            a: ah.view((k, k), (nn, nn)).into_owned(),
            b: bn,
            s: sn,
            q: linalg::sym(&c0.view((k, k), (nn, nn)).into_owned()),
            r: linalg::sym(&rn),
        };
        let (x, mut st) = reduced.minimal_solution(tol)?;
        st.deflations += 1;
        let mut ph = p0;
        let xs = ph.view((k, k), (nn, nn)) + x;
        ph.view_mut((k, k), (nn, nn)).copy_from(&xs);
        Ok((linalg::sym(&(&qc * ph * qc.transpose())), st))
    }
}

/// Drop constraint directions that `B0` annihilates, after checking that
/// `S0` vanishes on them too.
fn prune_constraint(b0: &Mat, s0: &Mat, scale: f64) -> Result<(Mat, Mat)> {
    if b0.ncols() == 0 {
        return Ok((b0.clone(), s0.clone()));
    }
    let k = b0.ncols();
    let mut sq = Mat::zeros(b0.nrows().max(k), k);
    sq.view_mut((0, 0), b0.shape()).copy_from(b0);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let top = svd.singular_values.max();
    let mut keep = Vec::new();
    for i in 0..k {
        let w = vt.row(i).transpose();
        if svd.singular_values[i] > 1e-10 * scale.max(top) {
            keep.push(w);
        } else if (s0 * &w).amax() > 1e-8 * scale {
            return Err(Error::Solver(
                "KYP inequality infeasible: inconsistent coupling constraint".into(),
            ));
        }
    }
    let w = Mat::from_columns(&keep);
    if keep.is_empty() {
        return Ok((Mat::zeros(b0.nrows(), 0), Mat::zeros(s0.nrows(), 0)));
    }
    Ok((b0 * &w, s0 * &w))
}

/// Stabilizing solution via the stable invariant subspace of the Hamiltonian.
fn riccati(p: &Popov, tol: &PopovTol) -> Result<(Mat, PopovStats)> {
    let n = p.states();
    let m = p.inputs();
    let (f, g, h0) = if m == 0 {
        (p.a.clone(), Mat::zeros(n, n), p.q.clone())
    } else {
        let rinv = linalg::inverse(&linalg::sym(&p.r))?;
        let f = &p.a + &p.b * &rinv * p.s.transpose();
        let g = linalg::sym(&(&p.b * &rinv * p.b.transpose()));
        let h0 = linalg::sym(&(&p.q + &p.s * &rinv * p.s.transpose()));
        (f, g, h0)
    };
    let mut ham = Mat::zeros(2 * n, 2 * n);
    ham.view_mut((0, 0), (n, n)).copy_from(&f);
    ham.view_mut((0, n), (n, n)).copy_from(&(-&g));
    ham.view_mut((n, 0), (n, n)).copy_from(&h0);
    ham.view_mut((n, n), (n, n)).copy_from(&(-f.transpose()));
    let hnorm = ham.amax().max(f64::MIN_POSITIVE) * (2 * n) as f64;

    let ord = linalg::ordered_real_schur(&ham, |l: Complex64| l.re < 0.0)?;
    let eigs = linalg::real_schur_eigs(&ord.t);
    let gap = eigs
        .iter()
        .map(|l| l.re.abs())
        .fold(f64::INFINITY, f64::min)
        / hnorm;
    if ord.selected != n || gap <= tol.imag_axis {
        return Err(Error::Solver(format!(
            "Hamiltonian has eigenvalues on or near the imaginary axis (stable count {} of {n}, gap {gap:.2e})",
            ord.selected
        )));
    }
    let u1 = ord.q.view((0, 0), (n, n)).into_owned();
    let u2 = ord.q.view((n, 0), (n, n)).into_owned();
    // X = U2 U1^-1 solves the CARE for X = -P
    let xt = linalg::solve(&u1.transpose(), &u2.transpose())?;
    let pm = linalg::sym(&(-xt.transpose()));
    let cl = &f + &g * &pm;
    let abscissa = linalg::eigenvalues(&cl)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((
        pm,
        PopovStats {
            deflations: 0,
            hamiltonian_gap: gap,
            closed_loop_abscissa: abscissa,
        },
    ))
}
