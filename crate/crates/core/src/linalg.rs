//! Small dense-matrix helpers shared by the learners.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// Row-major nested arrays, the on-disk matrix layout.
pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(invalid(format!("expected a {nrows}x{ncols} matrix")));
    }
    Ok(DMatrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
}

/// Unbiased sample covariance of the rows of `samples`, exactly symmetric.
pub fn sample_covariance(samples: &DMatrix<f64>) -> DMatrix<f64> {
    let n = samples.nrows();
    let mean = samples.row_mean();
    let mut centered = samples.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.tr_mul(&centered) / (n as f64 - 1.0);
    (&cov + cov.transpose()) * 0.5
}
