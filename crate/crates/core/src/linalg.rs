//! Thin helpers over nalgebra for the small dense systems used throughout.

use nalgebra::{DMatrix, DVector};

use crate::error::{ContestError, Result};

/// Relative singular-value cutoff for pseudo-inverse solves.
pub const PINV_RTOL: f64 = 1e-12;

/// `sigma_min / sigma_max`; 0 for empty or zero matrices.
pub fn rcond(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let sv = a.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

/// Solves `a x = b` by LU, failing when `a` is numerically singular.
pub fn solve(a: &DMatrix<f64>, b: &[f64], rcond_min: f64, what: &str) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    if rcond(a) < rcond_min {
        return Err(ContestError::Singular(what.to_string()));
    }
    let rhs = DVector::from_column_slice(b);
    a.clone()
        .lu()
        .solve(&rhs)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| ContestError::Singular(what.to_string()))
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    lstsq_rtol(a, b, PINV_RTOL)
}

/// As [`lstsq`], dropping singular values below `rtol * sigma_max`.
pub fn lstsq_rtol(a: &DMatrix<f64>, b: &[f64], rtol: f64) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return vec![0.0; a.ncols()];
    }
    let svd = a.clone().svd(true, true);
    let eps = rtol * svd.singular_values.max();
    let rhs = DVector::from_column_slice(b);
    match svd.solve(&rhs, eps) {
        Ok(x) => x.iter().copied().collect(),
        Err(_) => vec![0.0; a.ncols()],
    }
}

pub fn matvec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|r| (0..a.ncols()).map(|c| a[(r, c)] * x[c]).sum())
        .collect()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}
