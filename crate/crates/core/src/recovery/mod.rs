//! Second-order realization of a reduced signature-symmetric model.
//!
//! The balanced reduced model has state blocks of sizes `(m, l, p | p, l, m)`:
//! characteristic values equal to one on both outer groups, the rest in the
//! middle. Within the outer groups an orthogonal change of basis separates
//! the input directions (`m`) from the undamped zero pairs (`l`). The middle
//! carries the zero dynamics `A_z`; a signature-preserving diagonalization,
//! optional padding with decoupled states, and 2x2 de-balancing transforms
//! make its leading `p x p` block vanish. Then the state matrix reads
//! `[[0, G^T], [-G, -D]]` and `(I, D, G G^T, B)` is a second-order model.

pub mod pairs;
pub mod signs;
pub mod synthetic;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fo_realization::{self, StructuredFirstOrder, ZeroTol};
use crate::linalg::{self, CMat, Mat};
use crate::prbt::ReducedStructured;
use crate::so_model::SecondOrderSystem;
use crate::tolerances;

pub use pairs::{
    check_condition, debalance_pair, debalance_pairs, plan_padding, ConditionCheck, Padding,
};
pub use signs::{
    sign_typed_diagonalize, theta_block, ComplexPair, SignTol, SignTypedEigen, ThetaBlock,
    TypedEigen,
};

#[derive(Debug, Clone, Copy)]
pub struct RecoveryOptions {
    /// Distance to one for boundary characteristic values.
    pub tol_one: f64,
    /// Allowed leading block after the transforms, relative to `||A||`.
    pub assembly_tol: f64,
    pub sign: SignTol,
    /// Compare the spectrum of `A_z` against the zeros of the reduced model.
    pub check_zeros: bool,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            tol_one: tolerances::SIGMA_ONE,
            assembly_tol: tolerances::ASSEMBLY,
            sign: SignTol::default(),
            check_zeros: true,
        }
    }
}

/// Block sizes of the balanced form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BalancedBlocks {
    pub m: usize,
    pub l: usize,
    pub p: usize,
}

impl BalancedBlocks {
    pub fn r(&self) -> usize {
        self.m + self.l + self.p
    }
}

/// One recorded step of the state transformation.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Transform {
    /// `A <- T^-1 A T`, `B <- T^-1 B`.
    Similarity { label: String, t: Mat },
    /// Insert decoupled states with the given diagonal values: `plus` at the
    /// end of the top half, `minus` at the start of the bottom half.
    Pad { plus: Vec<f64>, minus: Vec<f64> },
}

/// Insert the padding states into `(A, B)` (and identity rows into a transform).
fn insert_pad(a: &Mat, b: &Mat, plus: &[f64], minus: &[f64]) -> (Mat, Mat) {
    let n = a.nrows();
    let half = n / 2;
    let (jp, jm) = (plus.len(), minus.len());
    let nn = n + jp + jm;
    let old_of = |i: usize| -> Option<usize> {
        if i < half {
            Some(i)
        } else if i < half + jp + jm {
            None
        } else {
            Some(i - jp - jm)
        }
    };
    let mut ap = Mat::zeros(nn, nn);
    let mut bp = Mat::zeros(nn, b.ncols());
    for i in 0..nn {
        match old_of(i) {
            Some(oi) => {
                for j in 0..nn {
                    if let Some(oj) = old_of(j) {
                        ap[(i, j)] = a[(oi, oj)];
                    }
                }
                bp.set_row(i, &b.row(oi));
            }
            None => {
                let k = i - half;
                ap[(i, i)] = if k < jp { plus[k] } else { minus[k - jp] };
            }
        }
    }
    (ap, bp)
}

/// Embed a transform of the unpadded state into the padded one.
fn insert_identity(t: &Mat, jp: usize, jm: usize) -> Mat {
    let n = t.nrows();
    let half = n / 2;
    let map = |i: usize| if i < half { i } else { i + jp + jm };
    let nn = n + jp + jm;
    let mut out = Mat::identity(nn, nn);
    for i in 0..n {
        for j in 0..n {
            out[(map(i), map(j))] = t[(i, j)];
        }
    }
    out
}

fn apply(a: &Mat, b: &Mat, step: &Transform) -> Result<(Mat, Mat)> {
    match step {
        Transform::Similarity { t, .. } => Ok((linalg::solve(t, &(a * t))?, linalg::solve(t, b)?)),
        Transform::Pad { plus, minus } => Ok(insert_pad(a, b, plus, minus)),
    }
}

/// Re-apply a transform log to `(A, B)`.
pub fn replay(a: &Mat, b: &Mat, steps: &[Transform]) -> Result<(Mat, Mat)> {
    let mut cur = (a.clone(), b.clone());
    for s in steps {
        cur = apply(&cur.0, &cur.1, s)?;
    }
    Ok(cur)
}

/// `(I, D, K = G G^T, B)`; the mass matrix is the identity.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedSecondOrder {
    pub d: Mat,
    pub g: Mat,
    pub k: Mat,
    pub b: Mat,
}

impl ReducedSecondOrder {
    pub fn r(&self) -> usize {
        self.d.nrows()
    }

    pub fn to_system(&self) -> SecondOrderSystem {
        let r = self.r();
        SecondOrderSystem::new(
            Mat::identity(r, r),
            self.d.clone(),
            self.k.clone(),
            self.b.clone(),
        )
    }

    pub fn first_order(&self) -> StructuredFirstOrder {
        StructuredFirstOrder::from_blocks(&self.g, &self.d, &self.b)
    }

    /// `s B^T (s^2 I + s D + K)^-1 B`.
    pub fn transfer_function(&self, s: Complex64) -> Result<CMat> {
        self.to_system().transfer_function(s)
    }

    pub fn negative_damping_count(&self) -> usize {
        let scale = self.d.amax().max(f64::MIN_POSITIVE);
        linalg::sym_eigvals(&self.d)
            .iter()
            .filter(|&&v| v < -1e-14 * scale)
            .count()
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RecoveryResiduals {
    /// Off-pattern part of the balanced form, relative to `||A||`.
    pub pattern_defect: f64,
    /// Leading block and symmetry defect removed at assembly, relative to `||A||`.
    pub assembly_residual: f64,
    /// Largest distance between eigenvalues of `A_z` and stable zeros, relative.
    pub zero_mismatch: f64,
    /// Relative transfer-function change caused by padding.
    pub padding_mismatch: f64,
    /// Relative mismatch between the second-order and reduced first-order transfer functions.
    pub transfer_mismatch: f64,
    /// Relative mismatch of `(I, D, K)` against the moment reconstruction.
    pub moments_mismatch: f64,
    /// Relative mismatch between the logged transforms and the final state matrix.
    pub replay_mismatch: f64,
    pub eigvec_cond: f64,
    pub k_min_eig: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub blocks: BalancedBlocks,
    pub ell: usize,
    pub condition_ok: bool,
    pub mu_plus: Vec<f64>,
    pub mu_minus: Vec<f64>,
    pub complex_pairs: Vec<ComplexPair>,
    /// Added `(mu_plus, mu_minus)` pairs.
    pub padding: Vec<(f64, f64)>,
    pub final_r: usize,
    pub residuals: RecoveryResiduals,
    #[serde(skip)]
    pub transforms: Vec<Transform>,
    #[serde(skip)]
    pub result: ReducedSecondOrder,
}

/// Orthogonal bases for the boundary groups and the block sizes.
pub fn identify_balanced_blocks(
    red: &ReducedStructured,
    tol_one: f64,
) -> Result<(BalancedBlocks, Mat)> {
    let r = red.r;
    let m = red.sys.inputs();
    let near_one = |s: &f64| (s - 1.0).abs() <= tol_one;
    let bn = red.sigma[..r].iter().take_while(|s| near_one(s)).count();
    let bp = red.sigma[r..]
        .iter()
        .rev()
        .take_while(|s| near_one(s))
        .count();
    if bn != bp || bn < m {
        return Err(Error::Structure(format!(
            "boundary groups have sizes {bn} and {bp}, expected equal sizes of at least m = {m}"
        )));
    }
    let l = bn - m;
    let p = r - bn;
    let pos: Vec<usize> = (2 * r - bp..2 * r).collect();
    let bg = linalg::select_rows(&red.sys.b, &pos);
    let sv = linalg::singular_values(&bg);
    if sv.len() < m || sv[m - 1] <= 1e-8 * sv[0].max(f64::MIN_POSITIVE) {
        return Err(Error::Structure(
            "input map is rank deficient on the boundary group".into(),
        ));
    }
    let qb = linalg::full_q(&bg);
    let order: Vec<usize> = (m..bp).chain(0..m).collect();
    let qpos = linalg::select_cols(&qb, &order);

    let qneg = if l == 0 {
        Mat::identity(bn, bn)
    } else {
        let coupling = linalg::block(&red.sys.a, 0, 2 * r - bp, bn, bp) * qpos.columns(0, l);
        let svd = coupling.clone().svd(true, false);
        let u = svd.u.expect("requested");
        let s = svd.singular_values;
        let top = s.max();
        if s.min() <= 1e-8 * top.max(f64::MIN_POSITIVE) {
            return Err(Error::Structure(
                "coupling of the undamped blocks is singular".into(),
            ));
        }
        let fq = linalg::full_q(&u);
        let order: Vec<usize> = (l..bn).chain(0..l).collect();
        linalg::select_cols(&fq, &order)
    };
    let t = linalg::block_diag(&[&qneg, &Mat::identity(2 * p, 2 * p), &qpos]);
    Ok((BalancedBlocks { m, l, p }, t))
}

/// Entries that vanish in the balanced form, relative to `||A||`.
fn balanced_pattern_defect(a: &Mat, blk: BalancedBlocks) -> f64 {
    let BalancedBlocks { m, l, p } = blk;
    let sizes = [m, l, p, p, l, m];
    let mut start = [0; 7];
    for i in 0..6 {
        start[i + 1] = start[i] + sizes[i];
    }
    // nonzero block positions (row, col), zero-based
    let nonzero = |i: usize, j: usize| match i {
        0 => j == 5,
        1 => j == 4 || j == 5,
        2 | 3 => j == 2 || j == 3 || j == 5,
        4 => j == 1,
        _ => j != 4,
    };
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            if !nonzero(i, j) && sizes[i] > 0 && sizes[j] > 0 {
                worst = worst.max(a.view((start[i], start[j]), (sizes[i], sizes[j])).amax());
            }
        }
    }
    worst / linalg::norm2(a).max(f64::MIN_POSITIVE)
}

/// Largest distance from an eigenvalue of `A_z` to the stable zeros of the
/// reduced model, plus a count mismatch penalty.
fn zero_mismatch(red: &ReducedStructured, az_eigs: &[Complex64]) -> Result<f64> {
    let zeros = red.sys.zeros(&ZeroTol::default())?;
    let scale = linalg::norm2(&red.sys.a).max(1.0);
    let stable: Vec<Complex64> = zeros
        .zeros
        .iter()
        .filter(|z| z.re < -1e-8 * scale)
        .flat_map(|z| std::iter::repeat_n(z.value(), z.multiplicity))
        .collect();
    if stable.len() != az_eigs.len() {
        return Ok(f64::INFINITY);
    }
    let worst = az_eigs
        .iter()
        .map(|e| {
            stable
                .iter()
                .map(|z| (z - e).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

fn tf_mismatch(
    f: impl Fn(Complex64) -> Result<CMat>,
    g: impl Fn(Complex64) -> Result<CMat>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for w in linalg::logspace(1e-2, 1e2, 20) {
        let s = Complex64::new(0.0, w);
        let a = f(s)?;
        let b = g(s)?;
        worst = worst.max(linalg::cnorm2(&(&a - &b)) / linalg::cnorm2(&b).max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Transform the reduced model into second-order form.
pub fn recover(red: &ReducedStructured, opts: &RecoveryOptions) -> Result<RecoveryReport> {
    let anorm = linalg::norm2(&red.sys.a).max(f64::MIN_POSITIVE);
    let (blocks, tb) = identify_balanced_blocks(red, opts.tol_one)?;
    let BalancedBlocks { m, l, p } = blocks;
    let k0 = m + l;
    let mut steps = vec![Transform::Similarity {
        label: "boundary".into(),
        t: tb,
    }];
    let (a1, b1) = replay(&red.sys.a, &red.sys.b, &steps)?;
    let pattern_defect = balanced_pattern_defect(&a1, blocks);

    let az = linalg::block(&a1, k0, k0, 2 * p, 2 * p);
    let az_eigs = linalg::eigenvalues(&az)?;
    let azn = linalg::norm2(&az).max(f64::MIN_POSITIVE);
    if let Some(bad) = az_eigs.iter().find(|e| e.re >= -1e-12 * azn) {
        return Err(Error::Solver(format!(
            "zero dynamics not asymptotically stable (eigenvalue {:.3e}{:+.3e}i); the KYP solution is inaccurate",
            bad.re, bad.im
        )));
    }
    let zero_mm = if opts.check_zeros && p > 0 {
        zero_mismatch(red, &az_eigs)?
    } else {
        0.0
    };
    let st = sign_typed_diagonalize(&linalg::signature(p), &az, &opts.sign)?;
    let (c, k1, k2) = st.layout();
    let tz = linalg::block_diag(&[&Mat::identity(k0, k0), &st.t, &Mat::identity(k0, k0)]);
    steps.push(Transform::Similarity {
        label: "zero_dynamics".into(),
        t: tz,
    });

    let check = check_condition(&st.negative(), &st.positive());
    let pad = plan_padding(&check);
    let (mu_plus, mu_minus) = pad.apply(&check);
    if !pad.is_empty() {
        steps.push(Transform::Pad {
            plus: pad.plus.clone(),
            minus: pad.minus.clone(),
        });
    }
    let (jp, jm) = (pad.plus.len(), pad.minus.len());
    let rf = red.r + jp;
    debug_assert_eq!(k1 + jp, k2 + jm);

    let mut td = Mat::identity(2 * rf, 2 * rf);
    for (i, ti) in debalance_pairs(&mu_plus, &mu_minus)?.iter().enumerate() {
        let top = k0 + c + i;
        let bot = rf + i;
        td[(top, top)] = ti[(0, 0)];
        td[(top, bot)] = ti[(0, 1)];
        td[(bot, top)] = ti[(1, 0)];
        td[(bot, bot)] = ti[(1, 1)];
    }
    steps.push(Transform::Similarity {
        label: "debalance".into(),
        t: td,
    });
    let (af, bf) = replay(&a1, &b1, &steps[1..])?;

    // read off the second-order blocks
    let top_left = linalg::block(&af, 0, 0, rf, rf);
    let a_tb = linalg::block(&af, 0, rf, rf, rf);
    let a_bt = linalg::block(&af, rf, 0, rf, rf);
    let a_bb = linalg::block(&af, rf, rf, rf, rf);
    let bnorm = linalg::norm2(&red.sys.b).max(f64::MIN_POSITIVE);
    let assembly_residual = (top_left.amax() / anorm)
        .max((&a_tb + a_bt.transpose()).amax() / anorm)
        .max(bf.rows(0, rf).amax() / bnorm);
    if assembly_residual > opts.assembly_tol {
        return Err(Error::Assembly(format!(
            "leading block did not vanish (relative residual {assembly_residual:.3e} > {:.1e})",
            opts.assembly_tol
        )));
    }
    let g = (a_tb.transpose() - a_bt) * 0.5;
    let d = -linalg::sym(&a_bb);
    let k = linalg::sym(&(&g * g.transpose()));
    let b2 = bf.rows(rf, rf).into_owned();
    let result = ReducedSecondOrder { d, g, k, b: b2 };
    let k_min_eig = linalg::lambda_min(&result.k);
    if k_min_eig.is_nan() || k_min_eig <= 0.0 {
        return Err(Error::Assembly(format!(
            "recovered stiffness is not positive definite ({k_min_eig:.3e})"
        )));
    }

    // independent checks: total transform applied to the padded reduced model
    let (ap, bp) = insert_pad(&red.sys.a, &red.sys.b, &pad.plus, &pad.minus);
    let padding_mismatch = if pad.is_empty() {
        0.0
    } else {
        let padded = StructuredFirstOrder {
            c: bp.transpose(),
            a: ap.clone(),
            b: bp.clone(),
        };
        tf_mismatch(
            |s| padded.transfer_function(s),
            |s| red.sys.transfer_function(s),
        )?
    };
    let mut total = match &steps[0] {
        Transform::Similarity { t, .. } => t.clone(),
        _ => unreachable!(),
    };
    for s in &steps[1..] {
        match s {
            Transform::Similarity { t, .. } => total *= t,
            Transform::Pad { plus, minus } => {
                total = insert_identity(&total, plus.len(), minus.len())
            }
        }
    }
    let direct = linalg::solve(&total, &(&ap * &total))?;
    let replay_mismatch = (&direct - &af).amax() / anorm;
    let transfer_mismatch = tf_mismatch(
        |s| result.transfer_function(s),
        |s| red.sys.transfer_function(s),
    )?;
    let moments_mismatch = moments_check(&ap, &total, &result)?;

    let residuals = RecoveryResiduals {
        pattern_defect,
        assembly_residual,
        zero_mismatch: zero_mm,
        padding_mismatch,
        transfer_mismatch,
        moments_mismatch,
        replay_mismatch,
        eigvec_cond: st.cond,
        k_min_eig,
    };
    Ok(RecoveryReport {
        blocks,
        ell: l,
        condition_ok: check.condition_ok,
        mu_plus: check.mu_plus,
        mu_minus: check.mu_minus,
        complex_pairs: st.complex_pairs.clone(),
        padding: pad.pairs(),
        final_r: rf,
        residuals,
        transforms: steps,
        result,
    })
}

/// Moments of `L(s)^-1` from the standard triple built on the padded reduced
/// model `Z` and the accumulated transform `T`, compared with `(I, D, K)`.
pub fn moments_check(z: &Mat, t: &Mat, result: &ReducedSecondOrder) -> Result<f64> {
    let r = result.r();
    let mut sel = Mat::zeros(r, 2 * r);
    sel.view_mut((0, r), (r, r)).fill_with_identity();
    // X = [0 I] (Z T)^-1 = [0 I] T^-1 Z^-1, Y = T [0; I]
    let x = sel.clone() * linalg::inverse(&(z * t))?;
    let y = t * sel.transpose();
    let (mm, dm, km) = fo_realization::moments_reconstruct(&x, z, &y)?;
    let rel = |a: &Mat, b: &Mat| (a - b).amax() / b.amax().max(1.0);
    Ok(rel(&mm, &Mat::identity(r, r))
        .max(rel(&dm, &result.d))
        .max(rel(&km, &result.k)))
}

#[derive(Debug, Clone, Serialize)]
pub struct OverdampedReport {
    pub d_min_eig: f64,
    pub k_min_eig: f64,
    pub overdamped: bool,
    pub witness_mu: Option<f64>,
    /// Poles typed with respect to `-S`: the slower half.
    pub poles_negative_type: Vec<f64>,
    pub poles_positive_type: Vec<f64>,
    pub interlaced: bool,
}

/// Check that an overdamped input produced an overdamped reduced model whose
/// poles separate by type. Returns `Ok(None)` when the input is not overdamped.
pub fn overdamped_pipeline_check(
    original: &SecondOrderSystem,
    red: &ReducedStructured,
    result: &ReducedSecondOrder,
) -> Result<Option<OverdampedReport>> {
    let d_orig_min = linalg::lambda_min(&original.d);
    if d_orig_min <= 0.0 || !original.is_overdamped(1e-12)?.overdamped {
        return Ok(None);
    }
    let d_min_eig = linalg::lambda_min(&result.d);
    let k_min_eig = linalg::lambda_min(&result.k);
    let (overdamped, witness_mu) = if d_min_eig > 0.0 {
        let chk = result.to_system().is_overdamped(1e-12)?;
        (chk.overdamped, chk.mu)
    } else {
        (false, None)
    };
    // types with respect to -S: slow poles are of positive type
    let s = -linalg::signature(red.r);
    let st = sign_typed_diagonalize(&s, &red.sys.a, &SignTol::default())?;
    let neg = st.negative();
    let pos = st.positive();
    let interlaced = st.complex_pairs.is_empty()
        && neg.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            < pos.iter().copied().fold(f64::INFINITY, f64::min);
    let report = OverdampedReport {
        d_min_eig,
        k_min_eig,
        overdamped,
        witness_mu,
        poles_negative_type: neg,
        poles_positive_type: pos,
        interlaced,
    };
    if !(d_min_eig > 0.0 && k_min_eig > 0.0 && overdamped && interlaced) {
        return Err(Error::Structure(format!(
            "overdamping was not preserved: {report:?}"
        )));
    }
    Ok(Some(report))
}
