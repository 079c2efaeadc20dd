//! Positive-real balanced truncation using the signature structure.
//!
//! With `P = L^T L`, the eigenvalues of `L S L^T` are the positive real
//! characteristic values with signs: negative ones belong to the top half of
//! the balanced coordinates, positive ones to the bottom half. Truncating the
//! same number `r` on each side keeps the structure `S A S = A^T`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fo_realization::StructuredFirstOrder;
use crate::linalg::{self, Mat};
use crate::tolerances;

#[derive(Debug, Clone)]
pub struct SignedSpectrum {
    /// `sigma^-`, descending.
    pub neg: Vec<f64>,
    /// `sigma^+`, descending.
    pub pos: Vec<f64>,
    /// Eigenvectors matching `neg`, `pos`, and the kernel.
    pub u_neg: Mat,
    pub u_pos: Mat,
    pub u_zero: Mat,
    pub cluster_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Positive,
}

/// A multiplicity group of characteristic values on one side.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cluster {
    pub sigma: f64,
    pub multiplicity: usize,
    pub start: usize,
}

pub fn signed_eigendecomposition(l: &Mat, cluster_tol: f64) -> SignedSpectrum {
    let n2 = l.ncols();
    let s = linalg::signature(n2 / 2);
    let x = l * s * l.transpose();
    let (vals, vecs) = linalg::sym_eig(&x);
    let top = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let zero_thr = tolerances::SIGMA_ZERO * top;
    let mut neg = Vec::new();
    let mut pos = Vec::new();
    let mut zero = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        if v < -zero_thr {
            neg.push(i);
        } else if v > zero_thr {
            pos.push(i);
        } else {
            zero.push(i);
        }
    }
    // ascending eigenvalues: the most negative first gives descending sigma^-
    pos.reverse();
    SignedSpectrum {
        neg: neg.iter().map(|&i| -vals[i]).collect(),
        pos: pos.iter().map(|&i| vals[i]).collect(),
        u_neg: linalg::select_cols(&vecs, &neg),
        u_pos: linalg::select_cols(&vecs, &pos),
        u_zero: linalg::select_cols(&vecs, &zero),
        cluster_tol,
    }
}

impl SignedSpectrum {
    pub fn zero_count(&self) -> usize {
        self.u_zero.ncols()
    }

    pub fn side(&self, sign: Sign) -> &[f64] {
        match sign {
            Sign::Negative => &self.neg,
            Sign::Positive => &self.pos,
        }
    }

    /// Multiplicity groups of one side, in descending order.
    pub fn clusters(&self, sign: Sign) -> Vec<Cluster> {
        let vals = self.side(sign);
        let mut out: Vec<Cluster> = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            match out.last_mut() {
                Some(c) if (vals[i - 1] - v).abs() <= self.cluster_tol * vals[0].max(1.0) => {
                    c.multiplicity += 1;
                }
                _ => out.push(Cluster {
                    sigma: v,
                    multiplicity: 1,
                    start: i,
                }),
            }
        }
        for c in &mut out {
            c.sigma =
                vals[c.start..c.start + c.multiplicity].iter().sum::<f64>() / c.multiplicity as f64;
        }
        out
    }

    /// Number of values with `|sigma - 1| <= SIGMA_ONE` on one side.
    pub fn boundary(&self, sign: Sign) -> usize {
        self.side(sign)
            .iter()
            .filter(|&&s| (s - 1.0).abs() <= tolerances::SIGMA_ONE)
            .count()
    }

    /// Admissible kept counts on one side: cluster boundaries that keep all
    /// boundary values.
    pub fn cuts(&self, sign: Sign) -> Vec<usize> {
        let lo = self.boundary(sign);
        let mut cuts = vec![0];
        let mut acc = 0;
        for c in self.clusters(sign) {
            acc += c.multiplicity;
            cuts.push(acc);
        }
        cuts.retain(|&c| c >= lo);
        cuts
    }

    /// `U diag(-sigma^-, 0, sigma^+) U^T`.
    pub fn reconstruct(&self) -> Mat {
        let dn = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
            self.neg.len(),
            self.neg.iter().map(|s| -s),
        ));
        let dp = Mat::from_diagonal(&nalgebra::DVector::from_vec(self.pos.clone()));
        &self.u_neg * dn * self.u_neg.transpose() + &self.u_pos * dp * self.u_pos.transpose()
    }

    /// Rows `(index, sign, sigma, multiplicity)` for CSV export.
    pub fn rows(&self) -> Vec<(usize, &'static str, f64, usize)> {
        let mut out = Vec::new();
        for (sign, name) in [(Sign::Negative, "-"), (Sign::Positive, "+")] {
            let clusters = self.clusters(sign);
            for c in clusters {
                for i in c.start..c.start + c.multiplicity {
                    out.push((i + 1, name, self.side(sign)[i], c.multiplicity));
                }
            }
        }
        for i in 0..self.zero_count() {
            out.push((i + 1, "0", 0.0, self.zero_count()));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationPlan {
    pub target_r: usize,
    /// Kept count per sign.
    pub r: usize,
    pub truncated_sum_neg: f64,
    pub truncated_sum_pos: f64,
    /// `2 (truncated_sum_neg + truncated_sum_pos)`.
    pub error_bound: f64,
    /// Boundary values (sigma = 1) per sign.
    pub boundary: usize,
}

impl TruncationPlan {
    pub fn kept_neg(&self) -> std::ops::Range<usize> {
        0..self.r
    }

    pub fn kept_pos(&self) -> std::ops::Range<usize> {
        0..self.r
    }
}

/// Sum of a descending tail, accumulated from the smallest value up so that
/// longer tails never produce smaller sums in floating point.
fn tail_sum(vals: &[f64], from: usize) -> f64 {
    vals[from..].iter().rev().fold(0.0, |acc, &v| acc + v)
}

pub fn error_bound(spec: &SignedSpectrum, r: usize) -> f64 {
    2.0 * (tail_sum(&spec.neg, r) + tail_sum(&spec.pos, r))
}

/// Keep `r` values per sign without splitting clusters or dropping sigma = 1.
pub fn plan_truncation(spec: &SignedSpectrum, target_r: usize) -> Result<TruncationPlan> {
    let cuts_n = spec.cuts(Sign::Negative);
    let cuts_p = spec.cuts(Sign::Positive);
    let bn = spec.boundary(Sign::Negative);
    let bp = spec.boundary(Sign::Positive);
    let feasible: Vec<usize> = cuts_n
        .iter()
        .copied()
        .filter(|c| *c > 0 && cuts_p.contains(c))
        .collect();
    let nearest = |t: usize| -> Vec<usize> {
        let below = feasible.iter().copied().filter(|&c| c < t).max();
        let above = feasible.iter().copied().filter(|&c| c > t).min();
        below.into_iter().chain(above).collect()
    };
    if bn != bp {
        return Err(Error::Planning {
            reason: format!("boundary counts differ ({bn} negative, {bp} positive)"),
            feasible: Vec::new(),
        });
    }
    if target_r < bn || target_r == 0 {
        return Err(Error::Planning {
            reason: format!(
                "target r = {target_r} would truncate the {bn} boundary values per sign"
            ),
            feasible: nearest(target_r),
        });
    }
    let up = |cuts: &[usize], t: usize| cuts.iter().copied().filter(|&c| c >= t).min();
    let down = |cuts: &[usize], t: usize| cuts.iter().copied().filter(|&c| c <= t).max();
    let infeasible = |why: String| Error::Planning {
        reason: why,
        feasible: nearest(target_r),
    };

    let rn = up(&cuts_n, target_r).ok_or_else(|| {
        infeasible(format!(
            "only {} nonzero values on the negative side",
            spec.neg.len()
        ))
    })?;
    let rp = up(&cuts_p, target_r).ok_or_else(|| {
        infeasible(format!(
            "only {} nonzero values on the positive side",
            spec.pos.len()
        ))
    })?;
    let r = if rn == rp {
        rn
    } else {
        let (small_cuts, large_cuts, small, large) = if rn < rp {
            (&cuts_n, &cuts_p, rn, rp)
        } else {
            (&cuts_p, &cuts_n, rp, rn)
        };
        match up(small_cuts, large) {
            Some(g) if g == large => g,
            _ => match down(large_cuts, small) {
                Some(s) if s == small && s > 0 => s,
                _ => {
                    return Err(infeasible(format!(
                        "cannot equalize kept counts without splitting a cluster (negative side {rn}, positive side {rp})"
                    )))
                }
            },
        }
    };
    let sn = tail_sum(&spec.neg, r);
    let sp = tail_sum(&spec.pos, r);
    Ok(TruncationPlan {
        target_r,
        r,
        truncated_sum_neg: sn,
        truncated_sum_pos: sp,
        error_bound: 2.0 * (sn + sp),
        boundary: bn,
    })
}

/// Plan that drops only the zero characteristic values.
pub fn plan_full(spec: &SignedSpectrum) -> Result<TruncationPlan> {
    if spec.neg.len() != spec.pos.len() {
        return Err(Error::Planning {
            reason: format!(
                "nonzero counts differ ({} negative, {} positive)",
                spec.neg.len(),
                spec.pos.len()
            ),
            feasible: Vec::new(),
        });
    }
    plan_truncation(spec, spec.neg.len())
}

/// Reduced model of order `2r` in the signature-symmetric form.
#[derive(Debug, Clone)]
pub struct ReducedStructured {
    pub sys: StructuredFirstOrder,
    pub r: usize,
    /// Kept characteristic values, `sigma^-` descending then `sigma^+` ascending,
    /// matching the state order.
    pub sigma: Vec<f64>,
    pub w: Mat,
    pub v: Mat,
    /// `max |W^T V - I|` of the refined pair actually used.
    pub biorthogonality: f64,
    /// Same before the refinement step.
    pub raw_biorthogonality: f64,
    /// Largest structural defect removed by symmetrization, relative.
    pub structure_defect: f64,
}

impl ReducedStructured {
    pub fn sigma_matrix(&self) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_vec(self.sigma.clone()))
    }

    /// `lambda_max` of the primal and dual KYP matrices at `Sigma_1`.
    pub fn certificate(&self) -> (f64, f64) {
        let s1 = self.sigma_matrix();
        let primal = linalg::lambda_max(&self.sys.kyp_matrix(&s1));
        let dual = linalg::lambda_max(&self.sys.dual().kyp_matrix(&s1));
        (primal, dual)
    }
}

pub fn reduce(
    fo: &StructuredFirstOrder,
    l: &Mat,
    spec: &SignedSpectrum,
    plan: &TruncationPlan,
) -> Result<ReducedStructured> {
    let r = plan.r;
    if r > spec.neg.len() || r > spec.pos.len() {
        return Err(Error::Planning {
            reason: "plan inconsistent with spectrum".into(),
            feasible: Vec::new(),
        });
    }
    let n = fo.n();
    let pos_order: Vec<usize> = (0..r).rev().collect();
    let u1 = {
        let mut u = Mat::zeros(l.nrows(), 2 * r);
        u.view_mut((0, 0), (l.nrows(), r))
            .copy_from(&spec.u_neg.columns(0, r));
        u.view_mut((0, r), (l.nrows(), r))
            .copy_from(&linalg::select_cols(&spec.u_pos, &pos_order));
        u
    };
    let sigma: Vec<f64> = spec.neg[..r]
        .iter()
        .copied()
        .chain(pos_order.iter().map(|&i| spec.pos[i]))
        .collect();
    let isq = nalgebra::DVector::from_iterator(2 * r, sigma.iter().map(|s| 1.0 / s.sqrt()));
    let isq = Mat::from_diagonal(&isq);
    let sr = linalg::signature(r);
    let sn = linalg::signature(n);
    let wt = &isq * &sr * u1.transpose() * l;
    let v = &sn * l.transpose() * &u1 * &isq;
    let eye = Mat::identity(2 * r, 2 * r);
    let delta = &wt * &v - &eye;
    let raw = delta.amax();
    if raw > tolerances::BIORTH_BREAKDOWN {
        return Err(Error::Solver(format!(
            "reduction matrices lost biorthogonality ({raw:.2e}); revisit the rank tolerance"
        )));
    }
    // Small kept values leave an O(eps / sigma_min) defect. One symmetric
    // step removes it to second order; `S_r delta` is symmetric, so the
    // corrected pair keeps `W = S_n V S_r`.
    let half = &eye - &delta * 0.5;
    let wt = &half * wt;
    let v = v * &half;
    let bio = (&wt * &v - &eye).amax();
    let scale = linalg::norm2(&wt) * linalg::norm2(&v);
    if bio > 1e-10 * scale.max(1.0) {
        return Err(Error::Solver(format!(
            "reduction matrices lost biorthogonality ({bio:.2e}); revisit the rank tolerance"
        )));
    }
    let a = &wt * &fo.a * &v;
    let b = &wt * &fo.b;
    let c = &fo.c * &v;
    let an = a.amax().max(f64::MIN_POSITIVE);
    let bn = b.amax().max(f64::MIN_POSITIVE);
    let defect = [
        (&sr * &a * &sr - a.transpose()).amax() / an,
        b.rows(0, r).amax() / bn,
        (&c - b.transpose()).amax() / bn,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if defect > 1e-6 {
        return Err(Error::Structure(format!(
            "reduced model lost its signature structure ({defect:.2e})"
        )));
    }
    let a = (&a + &sr * a.transpose() * &sr) * 0.5;
    let mut b = b;
    b.rows_mut(0, r).fill(0.0);
    let c = b.transpose();
    Ok(ReducedStructured {
        sys: StructuredFirstOrder { a, b, c },
        r,
        sigma,
        w: wt.transpose(),
        v,
        biorthogonality: bio,
        raw_biorthogonality: raw,
        structure_defect: defect,
    })
}
