//! Minimal solution of the KYP inequality for structured realizations.
//!
//! For `[A, B, B^T]` the inequality reads `P B = B`, `A^T P + P A <= 0`. The
//! primary solver works on the orthogonally reduced form of [`structure`]:
//! there `P = diag(I, Pz, I)`, and `Pz` is the minimal solution of a Popov
//! inequality for the zero dynamics ([`popov`]). The regularized Riccati path
//! (`R = eps I` with decreasing `eps`) is kept as a fallback and as an
//! independent cross-check.

pub mod popov;
pub mod structure;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fo_realization::StructuredFirstOrder;
use crate::linalg::{self, Mat};
use crate::tolerances;

pub use popov::{Popov, PopovStats, PopovTol};
pub use structure::ZeroCharForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KypMethod {
    /// Structural deflation, then a Riccati equation for the zero dynamics.
    Structured,
    /// Riccati path with feedthrough `eps I`.
    Regularized,
}

#[derive(Debug, Clone)]
pub struct KypOptions {
    pub method: KypMethod,
    /// Fall back to the regularized path if the structured solver fails.
    pub fallback: bool,
    pub epsilon_schedule: Vec<f64>,
    pub path_tol: f64,
    pub rank_tol: f64,
    pub imag_axis_tol: f64,
}

impl Default for KypOptions {
    fn default() -> Self {
        Self {
            method: KypMethod::Structured,
            fallback: true,
            epsilon_schedule: tolerances::EPSILON_SCHEDULE.to_vec(),
            path_tol: tolerances::PATH_TOL,
            rank_tol: tolerances::RANK_TOL,
            imag_axis_tol: tolerances::IMAG_AXIS,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KypResiduals {
    /// `lambda_max(W(P))`.
    pub lmi_max_eig: f64,
    /// `||P B - C^T||`.
    pub coupling_norm: f64,
    /// Relative increment of the last path step (0 for the structured solver).
    pub minimality_gap: f64,
    /// Spectral abscissa of the Riccati closed loop; negative certifies minimality.
    pub closed_loop_abscissa: f64,
}

#[derive(Debug, Clone)]
pub struct KypSolution {
    pub p: Mat,
    pub rank: usize,
    pub method: KypMethod,
    pub residuals: KypResiduals,
    /// Regularization values actually used (empty for the structured solver).
    pub epsilon_schedule: Vec<f64>,
    /// Undamped imaginary-axis zero pairs found by the structural reduction.
    pub undamped: usize,
}

/// Minimal `P >= 0` with `W(P) <= 0`.
pub fn solve_min_kyp(fo: &StructuredFirstOrder, opts: &KypOptions) -> Result<KypSolution> {
    fo.check_structure(1e-8)?;
    pbh_check(fo, opts.imag_axis_tol)?;
    match opts.method {
        KypMethod::Regularized => regularized_path(fo, opts),
        KypMethod::Structured => match structured(fo, opts) {
            Ok(sol) => Ok(sol),
            Err(Error::Solver(msg)) if opts.fallback => regularized_path(fo, opts)
                .map_err(|e| Error::Solver(format!("structured solver: {msg}; fallback: {e}"))),
            Err(e) => Err(e),
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    fo: &StructuredFirstOrder,
    p: Mat,
    method: KypMethod,
    gap: f64,
    abscissa: f64,
    eps: Vec<f64>,
    undamped: usize,
    rank_tol: f64,
) -> KypSolution {
    let res = fo.kyp_residual(&p);
    let vals = linalg::sym_eigvals(&p);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let rank = vals.iter().filter(|&&v| v > rank_tol * top).count();
    KypSolution {
        p,
        rank,
        method,
        residuals: KypResiduals {
            lmi_max_eig: res.lmi_max_eig,
            coupling_norm: res.coupling_norm,
            minimality_gap: gap,
            closed_loop_abscissa: abscissa,
        },
        epsilon_schedule: eps,
        undamped,
    }
}

fn structured(fo: &StructuredFirstOrder, opts: &KypOptions) -> Result<KypSolution> {
    let (g, d, b) = (fo.g_block(), fo.d_block(), fo.b_block());
    let zcf = ZeroCharForm::compute(&g, &d, &b, tolerances::CLUSTER, 1e-10)?;
    if zcf.pattern_defect > 1e-8 {
        return Err(Error::Solver(format!(
            "structural reduction inaccurate (defect {:.2e})",
            zcf.pattern_defect
        )));
    }
    let (az, bz, d33) = zcf.zero_dynamics();
    let q = zcf.q;
    let sz = linalg::signature(q);
    let popov = Popov {
        a: az,
        s: &sz * &bz,
        b: bz,
        q: Mat::zeros(2 * q, 2 * q),
        r: &d33 * 2.0,
    };
    let (pz, stats) = popov.minimal_solution(&PopovTol::default())?;
    let k = zcf.m + zcf.l;
    let mut pt = Mat::identity(2 * fo.n(), 2 * fo.n());
    pt.view_mut((k, k), (2 * q, 2 * q)).copy_from(&pz);
    let t = zcf.transform();
    let p = linalg::sym(&(&t * pt * t.transpose()));
    Ok(finish(
        fo,
        p,
        KypMethod::Structured,
        0.0,
        stats.closed_loop_abscissa,
        Vec::new(),
        zcf.l,
        opts.rank_tol,
    ))
}

/// Stabilizing Riccati solution for the feedthrough `eps I`.
pub fn regularized_solution(fo: &StructuredFirstOrder, eps: f64) -> Result<(Mat, PopovStats)> {
    let m = fo.inputs();
    let n2 = fo.a.nrows();
    let popov = Popov {
        a: fo.a.clone(),
        b: fo.b.clone(),
        s: -fo.c.transpose(),
        q: Mat::zeros(n2, n2),
        r: Mat::identity(m, m) * eps,
    };
    popov.minimal_solution(&PopovTol {
        singular: 0.0,
        imag_axis: 0.0,
    })
}

fn regularized_path(fo: &StructuredFirstOrder, opts: &KypOptions) -> Result<KypSolution> {
    let mut prev: Option<Mat> = None;
    let mut used = Vec::new();
    let mut gap = f64::INFINITY;
    let mut last = None;
    for &eps in &opts.epsilon_schedule {
        let (p, stats) = regularized_solution(fo, eps)?;
        used.push(eps);
        if let Some(pp) = &prev {
            gap = linalg::norm2(&(&p - pp)) / linalg::norm2(&p).max(f64::MIN_POSITIVE);
        }
        prev = Some(p.clone());
        last = Some((p, stats));
        if gap <= opts.path_tol {
            break;
        }
    }
    let (p, stats) = last.ok_or_else(|| Error::Solver("empty regularization schedule".into()))?;
    if gap > opts.path_tol {
        return Err(Error::Solver(format!(
            "regularization path did not settle (last relative increment {gap:.2e} > {:.1e})",
            opts.path_tol
        )));
    }
    Ok(finish(
        fo,
        p,
        KypMethod::Regularized,
        gap,
        stats.closed_loop_abscissa,
        used,
        0,
        opts.rank_tol,
    ))
}

/// Reject uncontrollable eigenvalues on the imaginary axis.
fn pbh_check(fo: &StructuredFirstOrder, tol: f64) -> Result<()> {
    let anorm = linalg::norm2(&fo.a).max(f64::MIN_POSITIVE);
    let eigs = linalg::eigenvalues(&fo.a)?;
    let n2 = fo.a.nrows();
    let m = fo.inputs();
    for lam in eigs
        .iter()
        .filter(|l| l.re.abs() <= tol * anorm && l.im >= 0.0)
    {
        let mat = linalg::CMat::from_fn(n2, n2 + m, |i, j| {
            if j < n2 {
                let diag = if i == j {
                    *lam
                } else {
                    Complex64::new(0.0, 0.0)
                };
                diag - fo.a[(i, j)]
            } else {
                Complex64::new(fo.b[(i, j - n2)], 0.0)
            }
        });
        let smin = mat.transpose().singular_values().min();
        if smin <= tol * anorm {
            return Err(Error::Solver(format!(
                "uncontrollable eigenvalue {:.4}{:+.4}i on the imaginary axis",
                lam.re, lam.im
            )));
        }
    }
    Ok(())
}

/// `L` with `L^T L = P`, dropping eigenvalues below `rank_tol * lambda_max`.
pub fn factorize(p: &Mat, rank_tol: f64) -> Result<Mat> {
    let (vals, vecs) = linalg::sym_eig(p);
    let top = vals.iter().copied().fold(0.0, f64::max);
    let low = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if low < -rank_tol * top.max(1.0) {
        return Err(Error::Solver(format!(
            "P is not positive semidefinite (lambda_min = {low:.3e})"
        )));
    }
    let keep: Vec<usize> = (0..vals.len())
        .rev()
        .filter(|&i| vals[i] > rank_tol * top)
        .collect();
    let scale = DVector::from_iterator(keep.len(), keep.iter().map(|&i| vals[i].sqrt()));
    let u = linalg::select_cols(&vecs, &keep);
    Ok(Mat::from_diagonal(&scale) * u.transpose())
}
