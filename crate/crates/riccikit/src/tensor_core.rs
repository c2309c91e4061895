//! Coordinate differential geometry: Christoffel symbols, Riemannian
//! Hessians, and geometric / generalized Ricci tensors of an arbitrary
//! metric field. Closed-form metric derivatives are used when a metric
//! supplies them, central differences otherwise, so the same entry points
//! double as a finite-difference oracle for the closed forms elsewhere.

use crate::error::{Error, Result};
use crate::fields::{Matrix, MetricField, PotentialField, Vector};
use crate::linalg::{clamp_positive_definite, spd_inverse, spd_log_det, symmetrize};
use crate::tolerances::{FIRST_DERIVATIVE_STEP, SECOND_DERIVATIVE_STEP};

/// Christoffel symbols `Gamma^m_{ij}` at a point, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    #[inline]
    pub fn get(&self, m: usize, i: usize, j: usize) -> f64 {
        self.data[(m * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, m: usize, i: usize, j: usize, v: f64) {
        self.data[(m * self.dim + i) * self.dim + j] = v;
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |a, (u, v)| a.max((u - v).abs()))
    }
}

/// Default first-derivative step at `x`.
pub fn first_step(x: &Vector) -> f64 {
    FIRST_DERIVATIVE_STEP * (1.0 + x.norm())
}

/// Default second-derivative step at `x`.
pub fn second_step(x: &Vector) -> f64 {
    SECOND_DERIVATIVE_STEP * (1.0 + x.norm())
}

fn shifted(x: &Vector, k: usize, h: f64) -> Vector {
    let mut y = x.clone();
    y[k] += h;
    y
}

fn ensure_stencil(metric: &dyn MetricField, x: &Vector, h: f64) -> Result<()> {
    if !metric.contains(x) {
        return Err(Error::StepTooLarge { point: x.iter().copied().collect(), step: 0.0 });
    }
    for k in 0..metric.dim() {
        for s in [-h, h] {
            if !metric.contains(&shifted(x, k, s)) {
                return Err(Error::StepTooLarge { point: x.iter().copied().collect(), step: h });
            }
        }
    }
    Ok(())
}

/// Metric at `x`, checked (and roundoff-clamped) for positive definiteness.
pub fn checked_metric(metric: &dyn MetricField, x: &Vector) -> Result<Matrix> {
    clamp_positive_definite(&metric.metric(x), x)
}

/// `dg/dx_k` for every `k`, closed form when supplied, central differences otherwise.
pub fn metric_derivatives(metric: &dyn MetricField, x: &Vector, step: Option<f64>) -> Result<Vec<Matrix>> {
    let d = metric.dim();
    let mut out = Vec::with_capacity(d);
    let h = step.unwrap_or_else(|| first_step(x));
    let mut checked = false;
    for k in 0..d {
        if let Some(m) = metric.metric_derivative(x, k) {
            out.push(m);
            continue;
        }
        if !checked {
            ensure_stencil(metric, x, h)?;
            checked = true;
        }
        let plus = checked_metric(metric, &shifted(x, k, h))?;
        let minus = checked_metric(metric, &shifted(x, k, -h))?;
        out.push(symmetrize(&((plus - minus) / (2.0 * h))));
    }
    Ok(out)
}

/// `Gamma^m_{ij} = 1/2 g^{mk} (d_j g_{ki} + d_i g_{kj} - d_k g_{ij})`.
pub fn christoffel(metric: &dyn MetricField, x: &Vector, step: Option<f64>) -> Result<Christoffel> {
    let d = metric.dim();
    let g = checked_metric(metric, x)?;
    let ginv = spd_inverse(&g).ok_or_else(|| Error::NonPositiveDefiniteMetric {
        point: x.iter().copied().collect(),
        min_eigenvalue: 0.0,
    })?;
    let dg = metric_derivatives(metric, x, step)?;
    let mut gamma = Christoffel::zeros(d);
    for i in 0..d {
        for j in i..d {
            // lowered symbol Gamma_{k,ij}
            let lowered: Vec<f64> =
                (0..d).map(|k| 0.5 * (dg[j][(k, i)] + dg[i][(k, j)] - dg[k][(i, j)])).collect();
            for m in 0..d {
                let v: f64 = (0..d).map(|k| ginv[(m, k)] * lowered[k]).sum();
                gamma.set(m, i, j, v);
                gamma.set(m, j, i, v);
            }
        }
    }
    Ok(gamma)
}

/// `(Hess_g f)_{ij} = d_ij f - Gamma^k_{ij} d_k f`.
pub fn riemannian_hessian(metric: &dyn MetricField, f: &dyn PotentialField, x: &Vector) -> Result<Matrix> {
    let gamma = christoffel(metric, x, None)?;
    Ok(hessian_with_symbols(&gamma, &f.gradient(x), &f.hessian(x)))
}

/// Covariant Hessian from precomputed symbols, gradient, and coordinate Hessian.
pub fn hessian_with_symbols(gamma: &Christoffel, grad: &Vector, hess: &Matrix) -> Matrix {
    let d = gamma.dim;
    let mut out = hess.clone();
    for i in 0..d {
        for j in 0..d {
            let corr: f64 = (0..d).map(|k| gamma.get(k, i, j) * grad[k]).sum();
            out[(i, j)] -= corr;
        }
    }
    symmetrize(&out)
}

/// Geometric Ricci tensor from central differences of the Christoffel
/// symbols: `R_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik`.
pub fn geometric_ricci_fd(metric: &dyn MetricField, x: &Vector, step: Option<f64>) -> Result<Matrix> {
    let d = metric.dim();
    let h = step.unwrap_or_else(|| second_step(x));
    ensure_stencil(metric, x, h)?;
    let gamma = christoffel(metric, x, None)?;
    // dgamma[q] = d/dx_q Gamma
    let mut dgamma = Vec::with_capacity(d);
    for q in 0..d {
        let plus = christoffel(metric, &shifted(x, q, h), None)?;
        let minus = christoffel(metric, &shifted(x, q, -h), None)?;
        let mut dq = Christoffel::zeros(d);
        for (slot, (p, m)) in dq.data.iter_mut().zip(plus.data.iter().zip(&minus.data)) {
            *slot = (p - m) / (2.0 * h);
        }
        dgamma.push(dq);
    }
    let mut ric = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut v = 0.0;
            for k in 0..d {
                v += dgamma[k].get(k, i, j) - dgamma[j].get(k, i, k);
                for l in 0..d {
                    v += gamma.get(k, k, l) * gamma.get(l, i, j) - gamma.get(k, j, l) * gamma.get(l, i, k);
                }
            }
            ric[(i, j)] = v;
        }
    }
    Ok(symmetrize(&ric))
}

/// `P = V + 1/2 log det g`, so that `exp(-P) vol_g = exp(-V) dx`.
pub fn lebesgue_to_volume_potential(metric: &dyn MetricField, v: &dyn PotentialField, x: &Vector) -> Result<f64> {
    let g = checked_metric(metric, x)?;
    let ld = spd_log_det(&g).ok_or_else(|| Error::NonPositiveDefiniteMetric {
        point: x.iter().copied().collect(),
        min_eigenvalue: 0.0,
    })?;
    Ok(v.value(x) + 0.5 * ld)
}

fn half_log_det_gradient(metric: &dyn MetricField, x: &Vector) -> Result<Vector> {
    let g = checked_metric(metric, x)?;
    let ginv = spd_inverse(&g).ok_or_else(|| Error::NonPositiveDefiniteMetric {
        point: x.iter().copied().collect(),
        min_eigenvalue: 0.0,
    })?;
    let dg = metric_derivatives(metric, x, None)?;
    Ok(Vector::from_iterator(dg.len(), dg.iter().map(|m| 0.5 * (&ginv * m).trace())))
}

/// Gradient of the volume potential `P`.
pub fn volume_potential_gradient(metric: &dyn MetricField, v: &dyn PotentialField, x: &Vector) -> Result<Vector> {
    Ok(v.gradient(x) + half_log_det_gradient(metric, x)?)
}

/// Coordinate Hessian of the volume potential `P`; the log-determinant part
/// is differentiated once more with the second-derivative stencil.
pub fn volume_potential_hessian(metric: &dyn MetricField, v: &dyn PotentialField, x: &Vector) -> Result<Matrix> {
    let d = metric.dim();
    let h = second_step(x);
    ensure_stencil(metric, x, h)?;
    let mut m = Matrix::zeros(d, d);
    for q in 0..d {
        let plus = half_log_det_gradient(metric, &shifted(x, q, h))?;
        let minus = half_log_det_gradient(metric, &shifted(x, q, -h))?;
        let col = (plus - minus) / (2.0 * h);
        m.set_column(q, &col);
    }
    Ok(symmetrize(&(v.hessian(x) + m)))
}

/// Generalized curvature at a point for every admissible dimension parameter.
#[derive(Debug, Clone)]
pub struct CurvaturePoint {
    pub x: Vector,
    /// Geometric Ricci tensor.
    pub ric_g: Matrix,
    /// `Ric_g + Hess_g P`.
    pub ric_gmu: Matrix,
    /// `ric_gmu - 1/(N - d) dP (x) dP`; equals `ric_gmu` for `N = inf`.
    pub ric_gmu_n: Matrix,
    pub n: f64,
}

/// Rejects dimension parameters in `[1, d)`.
pub fn check_dimension_parameter(n: f64, d: usize) -> Result<()> {
    if n.is_finite() && n >= 1.0 && n < d as f64 {
        return Err(Error::InvalidDimensionParameter { n, dim: d });
    }
    if n.is_nan() {
        return Err(Error::InvalidDimensionParameter { n, dim: d });
    }
    Ok(())
}

/// `Ric_{g,mu}` and its `N`-dimensional variant for `mu = exp(-V) dx`, with
/// `V` converted internally to a density against `vol_g`.
pub fn generalized_ricci(metric: &dyn MetricField, v: &dyn PotentialField, x: &Vector, n: f64) -> Result<CurvaturePoint> {
    let d = metric.dim();
    check_dimension_parameter(n, d)?;
    let ric_g = geometric_ricci_fd(metric, x, None)?;
    let gamma = christoffel(metric, x, None)?;
    let grad_p = volume_potential_gradient(metric, v, x)?;
    let hess_p = volume_potential_hessian(metric, v, x)?;
    let ric_gmu = symmetrize(&(&ric_g + hessian_with_symbols(&gamma, &grad_p, &hess_p)));
    let ric_gmu_n = dimensional_correction(&ric_gmu, &grad_p, n, d)?;
    Ok(CurvaturePoint { x: x.clone(), ric_g, ric_gmu, ric_gmu_n, n })
}

/// `ric - 1/(N - d) dP (x) dP`, with `N = inf` contributing nothing.
pub fn dimensional_correction(ric: &Matrix, grad_p: &Vector, n: f64, d: usize) -> Result<Matrix> {
    if n.is_infinite() {
        return Ok(ric.clone());
    }
    let gap = n - d as f64;
    if gap == 0.0 {
        if grad_p.norm() == 0.0 {
            return Ok(ric.clone());
        }
        return Err(Error::InvalidDimensionParameter { n, dim: d });
    }
    Ok(symmetrize(&(ric - (grad_p * grad_p.transpose()) / gap)))
}
