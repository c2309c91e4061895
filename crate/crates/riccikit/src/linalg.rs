//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::fields::{Matrix, Vector};
use crate::tolerances::PSD_CLAMP;

/// `(A + A^T) / 2`.
pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// Smallest eigenvalue of the symmetric part of `a`.
pub fn min_eigenvalue(a: &Matrix) -> f64 {
    if a.nrows() == 1 {
        return a[(0, 0)];
    }
    SymmetricEigen::new(symmetrize(a)).eigenvalues.min()
}

/// Largest eigenvalue of the symmetric part of `a`.
pub fn max_eigenvalue(a: &Matrix) -> f64 {
    if a.nrows() == 1 {
        return a[(0, 0)];
    }
    SymmetricEigen::new(symmetrize(a)).eigenvalues.max()
}

/// Accepts `g` as a metric: eigenvalues slightly below zero (relative to
/// `PSD_CLAMP (1 + ||g||_F)`) are clamped to that threshold, anything
/// lower is reported as a degenerate metric at `x`.
pub fn clamp_positive_definite(g: &Matrix, x: &Vector) -> Result<Matrix> {
    let g = symmetrize(g);
    let threshold = PSD_CLAMP * (1.0 + g.norm());
    let eig = SymmetricEigen::new(g.clone());
    let min = eig.eigenvalues.min();
    if min > threshold {
        return Ok(g);
    }
    if min < -threshold || !min.is_finite() {
        return Err(Error::NonPositiveDefiniteMetric {
            point: x.iter().copied().collect(),
            min_eigenvalue: min,
        });
    }
    let vals = eig.eigenvalues.map(|v| v.max(threshold));
    Ok(&eig.eigenvectors * Matrix::from_diagonal(&vals) * eig.eigenvectors.transpose())
}

/// Inverse of a symmetric positive-definite matrix, symmetrized.
pub fn spd_inverse(a: &Matrix) -> Option<Matrix> {
    let chol = nalgebra::Cholesky::new(symmetrize(a))?;
    Some(symmetrize(&chol.inverse()))
}

/// `log det` of a symmetric positive-definite matrix.
pub fn spd_log_det(a: &Matrix) -> Option<f64> {
    let chol = nalgebra::Cholesky::new(symmetrize(a))?;
    Some(2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
}

/// Euclidean norm of a slice.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dot product of slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The `index`-th smallest eigenvalue (0-based) of the symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `off`, by Sturm-sequence bisection.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], index: usize) -> Result<f64> {
    let n = diag.len();
    if index >= n || off.len() + 1 != n {
        return Err(Error::EigensolveFailure(format!("bad tridiagonal shape n={n} index={index}")));
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    // number of eigenvalues strictly below s
    let count_below = |s: f64| -> usize {
        let mut count = 0;
        let mut q = diag[0] - s;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let denom = if q == 0.0 { f64::EPSILON * (off[i - 1].abs() + 1.0) } else { q };
            q = diag[i] - s - off[i - 1] * off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    if !value.is_finite() {
        return Err(Error::EigensolveFailure("non-finite eigenvalue".into()));
    }
    Ok(value)
}
