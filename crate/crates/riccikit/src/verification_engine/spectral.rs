//! One-dimensional spectral gap of `-(w u')'/w` with zero-flux ends.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::Profile1D;
use crate::linalg::tridiagonal_eigenvalue;

/// Smallest admissible grid.
pub const MIN_SPECTRAL_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralGap {
    /// Richardson-extrapolated first nonzero eigenvalue.
    pub lambda1: f64,
    /// `1 / lambda1`.
    pub poincare: f64,
    /// Eigenvalue on `n` cells.
    pub coarse: f64,
    /// Eigenvalue on `2n` cells.
    pub fine: f64,
}

/// First nonzero eigenvalue of the weighted Neumann problem on `n` cells.
fn gap_on_grid(v: &dyn Profile1D, (a, b): (f64, f64), n: usize) -> Result<f64> {
    let h = (b - a) / n as f64;
    let centers: Vec<f64> = (0..n).map(|i| a + (i as f64 + 0.5) * h).collect();
    let faces: Vec<f64> = (1..n).map(|i| a + i as f64 * h).collect();
    let vc: Vec<f64> = centers.iter().map(|&x| v.value(x)).collect();
    let vf: Vec<f64> = faces.iter().map(|&x| v.value(x)).collect();
    let vmin = vc.iter().chain(&vf).copied().fold(f64::INFINITY, f64::min);
    if !vmin.is_finite() {
        return Err(Error::EigensolveFailure("potential is not finite on the grid".into()));
    }
    let weight = |val: f64| (-(val - vmin)).exp().max(1e-300);
    let mass: Vec<f64> = vc.iter().map(|&val| weight(val) * h).collect();
    let cond: Vec<f64> = vf.iter().map(|&val| weight(val) / h).collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { cond[i - 1] } else { 0.0 };
            let right = if i + 1 < n { cond[i] } else { 0.0 };
            (left + right) / mass[i]
        })
        .collect();
    let off: Vec<f64> = (0..n - 1).map(|i| -cond[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    if diag.iter().chain(&off).any(|v| !v.is_finite()) {
        return Err(Error::EigensolveFailure("non-finite stiffness entries".into()));
    }
    tridiagonal_eigenvalue(&diag, &off, 1)
}

/// Spectral gap of `exp(-V)` on `[a, b]`, from `n` and `2n` cells with
/// Richardson extrapolation `(4 lambda_2n - lambda_n) / 3`.
pub fn spectral_gap_1d(v: &dyn Profile1D, interval: (f64, f64), n: usize) -> Result<SpectralGap> {
    if n < MIN_SPECTRAL_GRID {
        return Err(Error::InvalidParameter { name: "n".into(), reason: format!("grid needs at least {MIN_SPECTRAL_GRID} cells") });
    }
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::InvalidParameter { name: "interval".into(), reason: "needs finite a < b".into() });
    }
    let coarse = gap_on_grid(v, interval, n)?;
    let fine = gap_on_grid(v, interval, 2 * n)?;
    let lambda1 = (4.0 * fine - coarse) / 3.0;
    if !(lambda1 > 0.0) {
        return Err(Error::EigensolveFailure(format!("non-positive gap {lambda1:e}")));
    }
    Ok(SpectralGap { lambda1, poincare: 1.0 / lambda1, coarse, fine })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{LinearProfile, QuadraticProfile, ZeroProfile};
    use std::f64::consts::PI;

    #[test]
    fn uniform_interval() {
        let g = spectral_gap_1d(&ZeroProfile, (0.0, 1.0), 4096).unwrap();
        assert!((g.lambda1 - PI * PI).abs() < 1e-4, "{}", g.lambda1);
    }

    #[test]
    fn gaussian_hermite() {
        let g = spectral_gap_1d(&QuadraticProfile { sigma: 1.0, center: 0.0 }, (-8.0, 8.0), 4096).unwrap();
        assert!((g.lambda1 - 1.0).abs() < 1e-4, "{}", g.lambda1);
    }

    #[test]
    fn truncated_exponential() {
        // Neumann problem on [0, L]: 1/4 + pi^2 / L^2
        let g = spectral_gap_1d(&LinearProfile { slope: 1.0, offset: 0.0 }, (0.0, 40.0), 4096).unwrap();
        assert!((g.lambda1 - (0.25 + PI * PI / 1600.0)).abs() < 1e-4, "{}", g.lambda1);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(spectral_gap_1d(&ZeroProfile, (0.0, 1.0), 100).is_err());
    }
}
