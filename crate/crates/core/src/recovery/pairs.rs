//! Pairing of typed real zeros, padding, and the de-balancing 2x2 transforms.
//!
//! `mu_plus` are the zeros of positive type (carried by S-negative
//! coordinates), `mu_minus` those of negative type. Second-order form exists
//! iff, after sorting both ascending, `mu_minus[i] < mu_plus[i]` for all `i`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub condition_ok: bool,
    pub counts_match: bool,
    pub mu_plus: Vec<f64>,
    pub mu_minus: Vec<f64>,
    /// Indices `i` with `mu_minus[i] >= mu_plus[i]`.
    pub violations: Vec<usize>,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn check_condition(mu_plus: &[f64], mu_minus: &[f64]) -> ConditionCheck {
    let plus = sorted(mu_plus);
    let minus = sorted(mu_minus);
    let counts_match = plus.len() == minus.len();
    let violations: Vec<usize> = plus
        .iter()
        .zip(&minus)
        .enumerate()
        .filter(|(_, (p, m))| m >= p)
        .map(|(i, _)| i)
        .collect();
    ConditionCheck {
        condition_ok: counts_match && violations.is_empty(),
        counts_match,
        mu_plus: plus,
        mu_minus: minus,
        violations,
    }
}

/// Synthetic zeros appended to make the pairing strict.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Padding {
    /// New positive-type values, ascending, all above every existing value.
    pub plus: Vec<f64>,
    /// New negative-type values, ascending, all below every existing value.
    pub minus: Vec<f64>,
}

impl Padding {
    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }

    /// `(mu_plus, mu_minus)` after padding, both ascending.
    pub fn apply(&self, check: &ConditionCheck) -> (Vec<f64>, Vec<f64>) {
        let plus = check.mu_plus.iter().chain(&self.plus).copied().collect();
        let minus = self.minus.iter().chain(&check.mu_minus).copied().collect();
        (plus, minus)
    }

    /// Added `(plus, minus)` values as listed pairs, padded with NaN if the
    /// counts differ.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        let n = self.plus.len().max(self.minus.len());
        (0..n)
            .map(|i| {
                (
                    self.plus.get(i).copied().unwrap_or(f64::NAN),
                    self.minus.get(i).copied().unwrap_or(f64::NAN),
                )
            })
            .collect()
    }
}

/// Fewest synthetic zeros that make the sorted pairing strict. New negative
/// values are prepended below everything, new positive values appended above.
pub fn plan_padding(check: &ConditionCheck) -> Padding {
    if check.condition_ok {
        return Padding::default();
    }
    let (plus, minus) = (&check.mu_plus, &check.mu_minus);
    let (kp, km) = (plus.len(), minus.len());
    let feasible = |jm: usize| (jm..plus.len().min(km + jm)).all(|i| minus[i - jm] < plus[i]);
    let mut jm = kp.saturating_sub(km);
    while !feasible(jm) {
        jm += 1;
    }
    let jp = km + jm - kp;
    let all = plus.iter().chain(minus);
    let hi = all.clone().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = all.copied().fold(f64::INFINITY, f64::min);
    // values moving geometrically toward 0 and away from the spectrum
    let new_plus: Vec<f64> = (1..=jp).map(|i| hi / 2f64.powi(i as i32)).collect();
    let mut new_minus: Vec<f64> = (1..=jm).map(|i| lo * 2f64.powi(i as i32)).collect();
    new_minus.reverse();
    Padding {
        plus: new_plus,
        minus: new_minus,
    }
}

/// `T_i = [[a, b], [b, a]]` for one pair `mu_minus < mu_plus < 0`; acting on
/// coordinates `(plus, minus)` it satisfies `T^T diag(-1, 1) T = diag(-1, 1)`
/// and zeroes the leading entry of `T^-1 diag(mu_plus, mu_minus) T`.
pub fn debalance_pair(mu_plus: f64, mu_minus: f64) -> Result<Mat> {
    if !(mu_minus < mu_plus && mu_plus < 0.0) {
        return Err(Error::Structure(format!(
            "cannot de-balance the pair mu+ = {mu_plus:.6e}, mu- = {mu_minus:.6e}; needs mu- < mu+ < 0"
        )));
    }
    let gap = mu_minus - mu_plus;
    let a = (mu_minus / gap).sqrt();
    let b = (mu_plus / gap).sqrt();
    Ok(Mat::from_row_slice(2, 2, &[a, b, b, a]))
}

pub fn debalance_pairs(mu_plus: &[f64], mu_minus: &[f64]) -> Result<Vec<Mat>> {
    if mu_plus.len() != mu_minus.len() {
        return Err(Error::Structure("unequal numbers of typed zeros".into()));
    }
    mu_plus
        .iter()
        .zip(mu_minus)
        .map(|(&p, &m)| debalance_pair(p, m))
        .collect()
}
