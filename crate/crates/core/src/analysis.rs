//! Frequency-domain comparison of an original and a reduced model.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::so_model::SecondOrderSystem;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrequencyRow {
    pub omega: f64,
    pub sigma_original: f64,
    pub sigma_reduced: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSummary {
    pub points: usize,
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub max_abs_error: f64,
    pub omega_max_abs: f64,
    pub max_rel_error: f64,
    pub omega_max_rel: f64,
    /// Error bound from the reduction report, when one was found.
    pub error_bound: Option<f64>,
}

/// Largest singular values of `G(i w)`, `G~(i w)` and of their difference.
pub fn compare(
    orig: &SecondOrderSystem,
    red: &SecondOrderSystem,
    omegas: &[f64],
) -> Result<Vec<FrequencyRow>> {
    if orig.inputs() != red.inputs() {
        return Err(Error::Validation(format!(
            "input dimensions differ: original has {}, reduced has {}",
            orig.inputs(),
            red.inputs()
        )));
    }
    omegas
        .iter()
        .map(|&omega| {
            let s = Complex64::new(0.0, omega);
            let g = orig.transfer_function(s)?;
            let gr = red.transfer_function(s)?;
            let sigma_original = linalg::cnorm2(&g);
            let abs_error = linalg::cnorm2(&(&gr - &g));
            Ok(FrequencyRow {
                omega,
                sigma_original,
                sigma_reduced: linalg::cnorm2(&gr),
                abs_error,
                rel_error: if sigma_original > 0.0 {
                    abs_error / sigma_original
                } else {
                    abs_error
                },
            })
        })
        .collect()
}

pub fn summarize(rows: &[FrequencyRow], error_bound: Option<f64>) -> ErrorSummary {
    let argmax = |f: fn(&FrequencyRow) -> f64| {
        rows.iter().fold((0.0f64, f64::NAN), |(best, at), r| {
            if f(r) > best {
                (f(r), r.omega)
            } else {
                (best, at)
            }
        })
    };
    let (max_abs_error, omega_max_abs) = argmax(|r| r.abs_error);
    let (max_rel_error, omega_max_rel) = argmax(|r| r.rel_error);
    ErrorSummary {
        points: rows.len(),
        omega_lo: rows.first().map_or(f64::NAN, |r| r.omega),
        omega_hi: rows.last().map_or(f64::NAN, |r| r.omega),
        max_abs_error,
        omega_max_abs,
        max_rel_error,
        omega_max_rel,
        error_bound,
    }
}

pub fn write_csv(path: &Path, rows: &[FrequencyRow]) -> Result<()> {
    let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    index: usize,
    sign: &'static str,
    sigma: f64,
    multiplicity: usize,
}

/// Signed characteristic values, one row per value.
pub fn write_spectrum_csv(path: &Path, spec: &crate::prbt::SignedSpectrum) -> Result<()> {
    let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for (index, sign, sigma, multiplicity) in spec.rows() {
        w.serialize(SpectrumRow {
            index,
            sign,
            sigma,
            multiplicity,
        })
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
