//! Second-order mechanical systems `M p'' + D p' + K p = B u`, `y = B^T p'`.
//!
//! The transfer function from force to velocity is
//! `G(s) = s B^T (s^2 M + s D + K)^{-1} B`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat};
use crate::tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderSystem {
    pub m: Mat,
    pub d: Mat,
    pub k: Mat,
    pub b: Mat,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub m: usize,
    pub min_eig_m: f64,
    pub min_eig_d: f64,
    pub min_eig_k: f64,
    pub rank_b: usize,
    /// Largest relative asymmetry of M, D, K.
    pub asymmetry: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Tolerances for [`SecondOrderSystem::validate`].
#[derive(Debug, Clone, Copy)]
pub struct ValidationTol {
    pub symmetry: f64,
    pub definiteness: f64,
    pub semidefinite: f64,
    pub rank: f64,
}

impl Default for ValidationTol {
    fn default() -> Self {
        Self {
            symmetry: tolerances::SYMMETRY,
            definiteness: tolerances::DEFINITENESS,
            semidefinite: tolerances::SEMIDEFINITE,
            rank: tolerances::RANK_B,
        }
    }
}

impl SecondOrderSystem {
    pub fn new(m: Mat, d: Mat, k: Mat, b: Mat) -> Self {
        Self { m, d, k, b }
    }

    /// Number of degrees of freedom.
    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    /// Number of inputs (= outputs).
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn validate(&self, tol: &ValidationTol) -> Result<()> {
        let rep = self.validation_report(tol)?;
        if rep.passed {
            Ok(())
        } else {
            Err(Error::Validation(rep.failures.join("; ")))
        }
    }

    /// Spectral data behind [`validate`](Self::validate). Shape and finiteness
    /// problems are errors; definiteness and rank problems are listed.
    pub fn validation_report(&self, tol: &ValidationTol) -> Result<ValidationReport> {
        let n = self.n();
        if n == 0 {
            return Err(Error::Validation("empty system".into()));
        }
        let mut failures = Vec::new();
        let mut asymmetry: f64 = 0.0;
        for (name, a) in [("M", &self.m), ("D", &self.d), ("K", &self.k)] {
            if a.shape() != (n, n) {
                return Err(Error::Validation(format!(
                    "{name} has shape {:?}, expected ({n}, {n})",
                    a.shape()
                )));
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("{name} has non-finite entries")));
            }
            let scale = a.amax().max(f64::MIN_POSITIVE);
            let asym = linalg::asymmetry(a);
            asymmetry = asymmetry.max(asym / scale);
            if asym > tol.symmetry * scale {
                failures.push(format!(
                    "{name} is not symmetric (max |a_ij - a_ji| = {asym:.3e})"
                ));
            }
        }
        if self.b.nrows() != n {
            return Err(Error::Validation(format!(
                "B has {} rows, expected {n}",
                self.b.nrows()
            )));
        }
        if self.b.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("B has non-finite entries".into()));
        }
        let m = self.inputs();
        if m == 0 || m > n {
            return Err(Error::Validation(format!(
                "B must have between 1 and {n} columns, has {m}"
            )));
        }
        let mut mins = [0.0; 3];
        for (i, (name, a)) in [("M", &self.m), ("K", &self.k)].into_iter().enumerate() {
            let ev = linalg::sym_eigvals(a);
            let (lo, hi) = (ev[0], ev[n - 1]);
            mins[2 * i] = lo;
            if lo.is_nan() || lo <= tol.definiteness * hi {
                failures.push(format!(
                    "{name} is not positive definite (lambda_min = {lo:.3e}, lambda_max = {hi:.3e})"
                ));
            }
        }
        let ev = linalg::sym_eigvals(&self.d);
        mins[1] = ev[0];
        let scale = ev[n - 1].abs().max(ev[0].abs()).max(f64::MIN_POSITIVE);
        if ev[0] < -tol.semidefinite * scale {
            failures.push(format!(
                "D is not positive semidefinite (lambda_min = {:.3e})",
                ev[0]
            ));
        }
        let rank_b = linalg::rank(&self.b, tol.rank);
        if rank_b != m {
            failures.push(format!(
                "B has rank {rank_b}, expected full column rank {m}"
            ));
        }
        Ok(ValidationReport {
            n,
            m,
            min_eig_m: mins[0],
            min_eig_d: mins[1],
            min_eig_k: mins[2],
            rank_b,
            asymmetry,
            passed: failures.is_empty(),
            failures,
        })
    }

    /// `s^2 M + s D + K`.
    pub fn pencil_at(&self, s: Complex64) -> CMat {
        let n = self.n();
        CMat::from_fn(n, n, |i, j| {
            s * s * self.m[(i, j)] + s * self.d[(i, j)] + self.k[(i, j)]
        })
    }

    pub fn transfer_function(&self, s: Complex64) -> Result<CMat> {
        let bc = linalg::to_complex(&self.b);
        let x = linalg::csolve(&self.pencil_at(s), &bc)?;
        Ok(bc.adjoint() * x * s)
    }

    /// Largest singular value of `G(i w)` on a grid.
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

    /// Overdamping test: search for `mu < 0` with `mu^2 M + mu D + K` negative
    /// definite. The search runs on the congruent pencil
    /// `mu^2 I + mu H^-1 D H^-T + H^-1 K H^-T` (`M = H H^T`), whose largest
    /// eigenvalue is convex in `mu`, so golden-section search is exact up to
    /// the bracket resolution.
    pub fn is_overdamped(&self, tol: f64) -> Result<OverdampedCheck> {
        let h = linalg::cholesky(&self.m, "M")?;
        let hinv = linalg::inverse(&h)?;
        let dh = linalg::sym(&(&hinv * &self.d * hinv.transpose()));
        let kh = linalg::sym(&(&hinv * &self.k * hinv.transpose()));
        let n = self.n();
        let f = |mu: f64| -> f64 {
            let mut q = &dh * mu + &kh;
            for i in 0..n {
                q[(i, i)] += mu * mu;
            }
            linalg::lambda_max(&q)
        };
        let top = linalg::lambda_max(&dh);
        if linalg::lambda_min(&dh) <= 0.0 {
            return Err(Error::Validation(
                "overdamping needs a positive definite damping matrix".into(),
            ));
        }
        let (mut a, mut b) = (-2.0 * top, 0.0);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..200 {
            if (b - a) <= 1e-14 * top {
                break;
            }
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2);
            }
        }
        let (mu, val) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
        let scale = linalg::lambda_max(&kh).max(top * top);
        let overdamped = val < -tol * scale;
        Ok(OverdampedCheck {
            overdamped,
            mu: overdamped.then_some(mu),
            lambda_max: val,
        })
    }

    /// Search for a vector violating the overdamping inequality
    /// `(v*Dv)^2 > 4 (v*Mv)(v*Kv)`: coordinate vectors, then random complex
    /// directions, `trials` in total. Returns the first witness found.
    pub fn overdamping_falsifier(&self, trials: usize, seed: u64) -> Option<DVector<Complex64>> {
        let n = self.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let quad = |a: &Mat, v: &DVector<Complex64>| -> f64 {
            (v.adjoint() * linalg::to_complex(a) * v)[(0, 0)].re
        };
        let violates = |v: &DVector<Complex64>| {
            let (dv, mv, kv) = (quad(&self.d, v), quad(&self.m, v), quad(&self.k, v));
            dv * dv <= 4.0 * mv * kv
        };
        // coordinate directions first: they decide the diagonal case
        let unit = |i: usize| {
            DVector::from_fn(n, |j, _| {
                Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
            })
        };
        if let Some(v) = (0..n.min(trials)).map(unit).find(|v| violates(v)) {
            return Some(v);
        }
        for _ in n.min(trials)..trials {
            let v = DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            if violates(&v) {
                return Some(v);
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OverdampedCheck {
    pub overdamped: bool,
    /// A certificate `mu < 0` when overdamped.
    pub mu: Option<f64>,
    /// Smallest value of `lambda_max(mu^2 I + mu D + K)` found (scaled coordinates).
    pub lambda_max: f64,
}

/// Parameters of the three-row mass-spring-damper chain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct TripleChainParams {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub alpha: f64,
    pub beta: f64,
    pub v: f64,
}

impl Default for TripleChainParams {
    fn default() -> Self {
        Self {
            k0: 50.0,
            k1: 10.0,
            k2: 20.0,
            k3: 1.0,
            m0: 1.0,
            m1: 1.0,
            m2: 2.0,
            m3: 3.0,
            alpha: 2e-3,
            beta: 2e-3,
            v: 5.0,
        }
    }
}

/// Three chains of `n_per_row` masses tied to one common mass, which is the
/// last coordinate. Rayleigh damping plus extra dampers on the first mass of
/// each row. All masses are driven by one common input.
pub fn generate_triple_chain(n_per_row: usize, p: &TripleChainParams) -> Result<SecondOrderSystem> {
    if n_per_row == 0 {
        return Err(Error::Validation("n_per_row must be positive".into()));
    }
    let named = [p.k0, p.k1, p.k2, p.k3, p.m0, p.m1, p.m2, p.m3];
    let damping = [p.alpha, p.beta, p.v];
    if named.iter().any(|&x| !(x > 0.0 && x.is_finite()))
        || damping.iter().any(|&x| !(x >= 0.0 && x.is_finite()))
    {
        return Err(Error::Validation(
            "stiffnesses and masses must be positive, damping coefficients nonnegative".into(),
        ));
    }
    let n = n_per_row;
    let dim = 3 * n + 1;
    let mut k = Mat::zeros(dim, dim);
    let mut mdiag = vec![0.0; dim];
    for (row, (ki, mi)) in [(p.k1, p.m1), (p.k2, p.m2), (p.k3, p.m3)]
        .into_iter()
        .enumerate()
    {
        let o = row * n;
        for i in 0..n {
            k[(o + i, o + i)] = 2.0 * ki;
            if i + 1 < n {
                k[(o + i, o + i + 1)] = -ki;
                k[(o + i + 1, o + i)] = -ki;
            }
            mdiag[o + i] = mi;
        }
        k[(o + n - 1, dim - 1)] = -ki;
        k[(dim - 1, o + n - 1)] = -ki;
    }
    k[(dim - 1, dim - 1)] = p.k1 + p.k2 + p.k3 + p.k0;
    mdiag[dim - 1] = p.m0;
    let m = Mat::from_diagonal(&DVector::from_vec(mdiag));
    let mut d = &m * p.alpha + &k * p.beta;
    for row in 0..3 {
        d[(row * n, row * n)] += p.v;
    }
    let b = Mat::from_element(dim, 1, 1.0);
    Ok(SecondOrderSystem { m, d, k, b })
}

/// Frequency sampling on the imaginary axis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct FrequencyGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub log: bool,
}

impl FrequencyGrid {
    pub fn log(lo: f64, hi: f64, points: usize) -> Self {
        Self {
            lo,
            hi,
            points,
            log: true,
        }
    }

    pub fn omegas(&self) -> Vec<f64> {
        if self.log {
            linalg::logspace(self.lo, self.hi, self.points)
        } else if self.points == 1 {
            vec![self.lo]
        } else {
            (0..self.points)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64)
                .collect()
        }
    }
}
