//! Closed-form generalized Ricci tensors and boundary quantities for
//! Hessian metrics `g = D^2 Phi`, diagonal product metrics, and conformal
//! metrics `g = exp(2 phi) Id`, plus the exact one-dimensional expression.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{Matrix, MetricField, PotentialField, Profile1D, Vector};
use crate::linalg::{max_eigenvalue, min_eigenvalue, spd_inverse, spd_log_det, symmetrize};
use crate::tensor_core::{check_dimension_parameter, Christoffel};
use crate::tolerances::{RADIAL_EPS_FACTOR, THIRD_DERIVATIVE_MAX_CONDITION, THIRD_DERIVATIVE_STEP};

fn point(x: &Vector) -> Vec<f64> {
    x.iter().copied().collect()
}

// ---------------------------------------------------------------------------
// Hessian metrics

/// `g = D^2 Phi` as a metric field.
#[derive(Clone)]
pub struct HessianMetric(pub Arc<dyn PotentialField>);

impl MetricField for HessianMetric {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn metric(&self, x: &Vector) -> Matrix {
        self.0.hessian(x)
    }
    fn metric_derivative(&self, x: &Vector, k: usize) -> Option<Matrix> {
        self.0.third(x).map(|t| t[k].clone())
    }
}

/// Transport data `(Phi, V, W)` with `grad Phi` pushing `exp(-V)` to `exp(-W)`.
#[derive(Clone)]
pub struct HessianMetricData {
    pub phi: Arc<dyn PotentialField>,
    pub v: Arc<dyn PotentialField>,
    pub w: Arc<dyn PotentialField>,
}

impl HessianMetricData {
    pub fn transport_map(&self, x: &Vector) -> Vector {
        self.phi.gradient(x)
    }
}

/// Output of [`hessian_ricci`].
#[derive(Debug, Clone)]
pub struct HessianRicci {
    pub ric: Matrix,
    pub h: Matrix,
}

/// `d/dx_k D^2 Phi`, closed form when available, otherwise a stencil on
/// the Hessian provided `D^2 Phi` is reasonably conditioned.
pub fn third_derivatives(phi: &dyn PotentialField, x: &Vector) -> Result<Vec<Matrix>> {
    if let Some(t) = phi.third(x) {
        return Ok(t);
    }
    let a = phi.hessian(x);
    let lo = min_eigenvalue(&a);
    let condition = if lo > 0.0 { max_eigenvalue(&a) / lo } else { f64::INFINITY };
    if condition > THIRD_DERIVATIVE_MAX_CONDITION {
        return Err(Error::MissingThirdDerivatives { condition });
    }
    let h = THIRD_DERIVATIVE_STEP;
    Ok((0..phi.dim())
        .map(|k| {
            let mut p = x.clone();
            let mut m = x.clone();
            p[k] += h;
            m[k] -= h;
            symmetrize(&((phi.hessian(&p) - phi.hessian(&m)) / (2.0 * h)))
        })
        .collect())
}

fn hessian_inverse(phi: &dyn PotentialField, x: &Vector) -> Result<(Matrix, Matrix)> {
    let a = phi.hessian(x);
    let inv = spd_inverse(&a).ok_or_else(|| Error::NonPositiveDefiniteMetric {
        point: point(x),
        min_eigenvalue: min_eigenvalue(&a),
    })?;
    Ok((a, inv))
}

/// `H_ij = Tr[A^-1 A_i A^-1 A_j]` with `A = D^2 Phi`.
pub fn h_matrix(inv: &Matrix, third: &[Matrix]) -> Matrix {
    let d = third.len();
    let b: Vec<Matrix> = third.iter().map(|t| inv * t).collect();
    let mut h = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = (&b[i] * &b[j]).trace();
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// `grad V - D^2 Phi grad W(grad Phi)`, the vector entering the lower bound on `H`.
pub fn transport_defect(data: &HessianMetricData, x: &Vector) -> Vector {
    let a = data.phi.hessian(x);
    let y = data.phi.gradient(x);
    data.v.gradient(x) - a * data.w.gradient(&y)
}

/// `Ric = H/4 + (D^2 V + D^2 Phi D^2 W(grad Phi) D^2 Phi) / 2`.
pub fn hessian_ricci(data: &HessianMetricData, x: &Vector) -> Result<HessianRicci> {
    let (a, inv) = hessian_inverse(data.phi.as_ref(), x)?;
    let third = third_derivatives(data.phi.as_ref(), x)?;
    let h = h_matrix(&inv, &third);
    let y = data.phi.gradient(x);
    let qw = &a * data.w.hessian(&y) * &a;
    let ric = symmetrize(&(&h * 0.25 + (data.v.hessian(x) + qw) * 0.5));
    Ok(HessianRicci { ric, h })
}

/// `(1/d) v (x) v` with `v = grad V - D^2 Phi grad W(grad Phi)`; never exceeds `H`.
pub fn hessian_h_lower_bound(data: &HessianMetricData, x: &Vector) -> Result<Matrix> {
    hessian_inverse(data.phi.as_ref(), x)?;
    let v = transport_defect(data, x);
    Ok((&v * v.transpose()) / data.phi.dim() as f64)
}

/// `Q = D^2 V/2 + D^2 Phi D^2 W D^2 Phi / 2 + (1/4d) v (x) v`, a lower bound for `Ric`.
pub fn refined_q(data: &HessianMetricData, x: &Vector) -> Result<Matrix> {
    let (a, _) = hessian_inverse(data.phi.as_ref(), x)?;
    let y = data.phi.gradient(x);
    let v = transport_defect(data, x);
    let d = data.phi.dim() as f64;
    let q = (data.v.hessian(x) + &a * data.w.hessian(&y) * &a) * 0.5 + (&v * v.transpose()) / (4.0 * d);
    Ok(symmetrize(&q))
}

/// The source potential `V = W(grad Phi) - log det D^2 Phi` that makes
/// `(Phi, V, W)` satisfy the Monge-Ampere equation exactly. Needs third and
/// fourth derivatives of `Phi` in closed form.
#[derive(Clone)]
pub struct MongeAmpereSource {
    pub phi: Arc<dyn PotentialField>,
    pub w: Arc<dyn PotentialField>,
}

impl MongeAmpereSource {
    fn log_det_parts(&self, x: &Vector) -> (Matrix, Matrix, Vec<Matrix>) {
        let a = self.phi.hessian(x);
        let inv = spd_inverse(&a).expect("Phi must be strongly convex");
        let third = self.phi.third(x).expect("closed-form third derivatives required");
        (a, inv, third)
    }
}

impl PotentialField for MongeAmpereSource {
    fn dim(&self) -> usize {
        self.phi.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        let a = self.phi.hessian(x);
        self.w.value(&self.phi.gradient(x)) - spd_log_det(&a).unwrap_or(f64::NAN)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let (a, inv, third) = self.log_det_parts(x);
        let y = self.phi.gradient(x);
        let grad_ld = Vector::from_iterator(third.len(), third.iter().map(|t| (&inv * t).trace()));
        a * self.w.gradient(&y) - grad_ld
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        let (a, inv, third) = self.log_det_parts(x);
        let fourth = self.phi.fourth(x).expect("closed-form fourth derivatives required");
        let d = a.nrows();
        let y = self.phi.gradient(x);
        let gw = self.w.gradient(&y);
        let mut m = &a * self.w.hessian(&y) * &a;
        for (k, t) in third.iter().enumerate() {
            m += t * gw[k];
        }
        // D^2 log det A = Tr[A^-1 A_ij] - Tr[A^-1 A_i A^-1 A_j]
        let h = h_matrix(&inv, &third);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] -= (&inv * &fourth[i * d + j]).trace() - h[(i, j)];
            }
        }
        symmetrize(&m)
    }
}

// ---------------------------------------------------------------------------
// Product metrics

/// Per-coordinate profile `u_i = 1/sqrt(Phi_i'')`; the metric is `sum u_i^-2 dx_i^2`.
#[derive(Clone)]
pub enum ProductProfile {
    Unit,
    /// `u = x^p` (metric `x^{-2p}`).
    Power { p: f64 },
    /// `u = exp(lambda x)` (metric `exp(-2 lambda x)`).
    Exp { lambda: f64 },
    /// Closure returning `[u, u', u'']`.
    Custom(Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>),
}

impl ProductProfile {
    /// `[u, u', u'']` at `t`.
    pub fn derivatives(&self, t: f64) -> [f64; 3] {
        match self {
            ProductProfile::Unit => [1.0, 0.0, 0.0],
            ProductProfile::Power { p } => {
                let u = t.powf(*p);
                [u, p * t.powf(p - 1.0), p * (p - 1.0) * t.powf(p - 2.0)]
            }
            ProductProfile::Exp { lambda } => {
                let u = (lambda * t).exp();
                [u, lambda * u, lambda * lambda * u]
            }
            ProductProfile::Custom(f) => f(t),
        }
    }

    fn requires_positive(&self) -> bool {
        matches!(self, ProductProfile::Power { .. })
    }
}

/// Diagonal product metric data.
#[derive(Clone)]
pub struct ProductMetricData {
    pub profiles: Vec<ProductProfile>,
}

impl ProductMetricData {
    pub fn uniform(d: usize, profile: ProductProfile) -> Self {
        Self { profiles: vec![profile; d] }
    }
}

impl MetricField for ProductMetricData {
    fn dim(&self) -> usize {
        self.profiles.len()
    }
    fn metric(&self, x: &Vector) -> Matrix {
        Matrix::from_diagonal(&Vector::from_iterator(
            self.dim(),
            self.profiles.iter().zip(x.iter()).map(|(p, t)| {
                let u = p.derivatives(*t)[0];
                1.0 / (u * u)
            }),
        ))
    }
    fn metric_derivative(&self, x: &Vector, k: usize) -> Option<Matrix> {
        let d = self.dim();
        let [u, du, _] = self.profiles[k].derivatives(x[k]);
        let mut m = Matrix::zeros(d, d);
        m[(k, k)] = -2.0 * du / (u * u * u);
        Some(m)
    }
    fn contains(&self, x: &Vector) -> bool {
        self.profiles.iter().zip(x.iter()).all(|(p, t)| !p.requires_positive() || *t > 0.0)
    }
}

/// `Ric = D^2 V + diag{ V_i u_i'/u_i - u_i''/u_i }`.
pub fn product_ricci(data: &ProductMetricData, v: &dyn PotentialField, x: &Vector) -> Result<Matrix> {
    let grad = v.gradient(x);
    let mut ric = v.hessian(x);
    for (i, p) in data.profiles.iter().enumerate() {
        let [u, du, ddu] = p.derivatives(x[i]);
        if !(u > 0.0) {
            return Err(Error::ProfileNotPositive { coordinate: i, value: u });
        }
        ric[(i, i)] += grad[i] * du / u - ddu / u;
    }
    Ok(symmetrize(&ric))
}

/// Orthant-convexity precondition for product metrics: every diagonal
/// entry `g_i = u_i^-2` must be non-increasing, i.e. `u_i' >= 0`.
pub fn product_orthant_convexity(data: &ProductMetricData, points: &[Vector]) -> bool {
    points.iter().all(|x| {
        data.profiles.iter().zip(x.iter()).all(|(p, t)| {
            let [u, du, _] = p.derivatives(*t);
            -2.0 * du / (u * u * u) <= 0.0
        })
    })
}

/// Curvature constant of the `x^{-2p}` product metric when `V_i >= lambda`:
/// `(lambda p/(2-2p))^{2-2p} (p(1-p)/(2p-1))^{2p-1}`, with `0^0 = 1` at `p = 1/2`.
pub fn poly_product_rho(p: f64, lambda: f64) -> f64 {
    let pow0 = |base: f64, e: f64| if e == 0.0 { 1.0 } else { base.powf(e) };
    pow0(lambda * p / (2.0 - 2.0 * p), 2.0 - 2.0 * p) * pow0(p * (1.0 - p) / (2.0 * p - 1.0), 2.0 * p - 1.0)
}

/// Curvature constant of the `x^{-2p}` product metric on `[0, R]^d`: `p(1-p)/R^{2-2p}`.
pub fn poly_product_rho_bounded(p: f64, r: f64) -> f64 {
    p * (1.0 - p) / r.powf(2.0 - 2.0 * p)
}

// ---------------------------------------------------------------------------
// One-dimensional exact formula

/// `V'' + V''''/(2V'') - 3/4 (V'''/V'')^2 - V' V'''/(2 V'')`.
pub fn ric_1d_exact(v: &dyn Profile1D, x: f64) -> Result<f64> {
    let [_, d1, d2, d3, d4] = v.derivatives(x);
    if d2 == 0.0 || !d2.is_finite() {
        return Err(Error::DegenerateHessian { point: vec![x] });
    }
    let r = d3 / d2;
    Ok(d2 + 0.5 * d4 / d2 - 0.75 * r * r - 0.5 * d1 * r)
}

/// `Ric = H/4 + D^2 V D^2 F(grad V) D^2 V / 2` on `(Omega, D^2 V, exp(-V))`,
/// using `F(grad V(x)) = <x, grad V(x)> + log det D^2 V(x)`.
pub fn entropic_hessian_ricci(v: &dyn PotentialField, x: &Vector) -> Result<Matrix> {
    let d = v.dim();
    let a = v.hessian(x);
    let inv = spd_inverse(&a).ok_or_else(|| Error::DegenerateHessian { point: point(x) })?;
    let third = third_derivatives(v, x).map_err(|_| Error::DegenerateHessian { point: point(x) })?;
    let grad = v.gradient(x);
    let grad_ld = |y: &Vector| -> Result<Vector> {
        let ay = v.hessian(y);
        let iy = spd_inverse(&ay).ok_or_else(|| Error::DegenerateHessian { point: point(y) })?;
        let ty = third_derivatives(v, y).map_err(|_| Error::DegenerateHessian { point: point(y) })?;
        Ok(Vector::from_iterator(d, ty.iter().map(|t| (&iy * t).trace())))
    };
    let h = h_matrix(&inv, &third);
    // G = <grad V, x> + log det D^2 V
    let mut grad_g = &grad + &a * x;
    grad_g += grad_ld(x)?;
    let d2_ld = match v.fourth(x) {
        Some(fourth) => {
            let mut m = Matrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] = (&inv * &fourth[i * d + j]).trace() - h[(i, j)];
                }
            }
            m
        }
        None => {
            let step = 1e-3 * (1.0 + x.norm());
            let mut m = Matrix::zeros(d, d);
            for q in 0..d {
                let mut p = x.clone();
                let mut n = x.clone();
                p[q] += step;
                n[q] -= step;
                m.set_column(q, &((grad_ld(&p)? - grad_ld(&n)?) / (2.0 * step)));
            }
            symmetrize(&m)
        }
    };
    let mut hess_g = &a * 2.0 + d2_ld;
    for (k, t) in third.iter().enumerate() {
        hess_g += t * x[k];
    }
    let grad_f = &inv * grad_g;
    let mut core = hess_g;
    for (k, t) in third.iter().enumerate() {
        core -= t * grad_f[k];
    }
    Ok(symmetrize(&(h * 0.25 + core * 0.5)))
}

// ---------------------------------------------------------------------------
// Conformal metrics over the Euclidean base

/// `g = exp(2 phi) Id`.
#[derive(Clone)]
pub struct ConformalMetric(pub Arc<dyn PotentialField>);

impl MetricField for ConformalMetric {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn metric(&self, x: &Vector) -> Matrix {
        let d = self.dim();
        Matrix::identity(d, d) * (2.0 * self.0.value(x)).exp()
    }
    fn metric_derivative(&self, x: &Vector, k: usize) -> Option<Matrix> {
        let d = self.dim();
        let e = (2.0 * self.0.value(x)).exp();
        Some(Matrix::identity(d, d) * (2.0 * self.0.gradient(x)[k] * e))
    }
}

/// Conformal exponent, optionally tagged with its radial parameters.
#[derive(Clone)]
pub struct ConformalMetricData {
    pub phi: Arc<dyn PotentialField>,
    pub radial: Option<(f64, f64)>,
}

impl ConformalMetricData {
    /// `phi = -(theta/2) log(|x|^2 + eps)`.
    pub fn radial(dim: usize, theta: f64, eps: f64) -> Self {
        Self {
            phi: Arc::new(crate::fields::RadialLog { dim, theta, eps }),
            radial: Some((theta, eps)),
        }
    }

    pub fn metric(&self) -> ConformalMetric {
        ConformalMetric(self.phi.clone())
    }
}

/// Default regularization for the radial exponent: `1e-6 R^2`.
pub fn default_radial_eps(circumradius: f64) -> f64 {
    RADIAL_EPS_FACTOR * circumradius * circumradius
}

/// `Gamma^m_ij = delta^m_i phi_j + delta^m_j phi_i - delta_ij phi_m`.
pub fn conformal_christoffel(phi: &dyn PotentialField, x: &Vector) -> Christoffel {
    let d = phi.dim();
    let g = phi.gradient(x);
    let mut gamma = Christoffel::zeros(d);
    for m in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut v = 0.0;
                if m == i {
                    v += g[j];
                }
                if m == j {
                    v += g[i];
                }
                if i == j {
                    v -= g[m];
                }
                gamma.set(m, i, j, v);
            }
        }
    }
    gamma
}

/// `Ric_g = -(d-2)(D^2 phi - dphi dphi) - (Lap phi + (d-2)|dphi|^2) Id`.
pub fn conformal_geometric_ricci(phi: &dyn PotentialField, x: &Vector) -> Matrix {
    let d = phi.dim();
    let g = phi.gradient(x);
    let h = phi.hessian(x);
    let dm2 = d as f64 - 2.0;
    let lap = h.trace();
    symmetrize(&(-(&h - &g * g.transpose()) * dm2 - Matrix::identity(d, d) * (lap + dm2 * g.norm_squared())))
}

/// `Hess_g f = D^2 f - dphi df - df dphi + <dphi, df> Id`.
pub fn conformal_hessian(phi: &dyn PotentialField, f: &dyn PotentialField, x: &Vector) -> Matrix {
    let d = phi.dim();
    let gp = phi.gradient(x);
    let gf = f.gradient(x);
    let cross = &gp * gf.transpose();
    symmetrize(&(f.hessian(x) - &cross - cross.transpose() + Matrix::identity(d, d) * gp.dot(&gf)))
}

/// Closed-form `Ric_{g,mu,N}` for `g = exp(2 phi) Id`, `mu = exp(-V) dx`.
pub fn conformal_ricci_n(data: &ConformalMetricData, v: &dyn PotentialField, n: f64, x: &Vector) -> Result<Matrix> {
    let d = data.phi.dim();
    check_dimension_parameter(n, d)?;
    let df = d as f64;
    if n == df {
        return Err(Error::InvalidDimensionParameter { n, dim: d });
    }
    let gp = data.phi.gradient(x);
    let hp = data.phi.hessian(x);
    let gv = v.gradient(x);
    let id = Matrix::identity(d, d);
    // coefficients of the N-dependent terms; N = inf gives 0, -1 and -2 - d
    let (c_vv, c_cross, c_pp) = if n.is_infinite() {
        (0.0, -1.0, -df - 2.0)
    } else {
        let k = 1.0 / (df - n);
        (k, n * k, df * n * k - 2.0)
    };
    let cross = &gv * gp.transpose();
    let ric = v.hessian(x)
        + &id * gv.dot(&gp)
        + (&gv * gv.transpose()) * c_vv
        + (&cross + cross.transpose()) * c_cross
        + (&gp * gp.transpose()) * c_pp
        + &hp * 2.0
        + &id * (2.0 * gp.norm_squared() - hp.trace());
    Ok(symmetrize(&ric))
}

/// Eigenvalues of `Ric_{g,lambda,N}` for the radial exponent with `V = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEigenvalues {
    /// `eps -> 0` limit, radial direction.
    pub radial: f64,
    /// `eps -> 0` limit, tangential directions.
    pub tangential: f64,
    pub radial_exact: f64,
    pub tangential_exact: f64,
}

/// Radial and tangential eigenvalues at radius `r`, exact in `eps` and in the limit.
pub fn radial_conformal_eigenvalues(theta: f64, eps: f64, n: f64, d: usize, r: f64) -> RadialEigenvalues {
    let df = d as f64;
    let dn = if n.is_infinite() { -df } else { df * n / (df - n) };
    let r2 = r * r;
    let s = r2 + eps;
    let tangential_exact = (theta * (df - 2.0) + 2.0 * theta * (theta - 1.0) * r2 / s) / s;
    let radial_exact = tangential_exact + (theta * theta * (dn - 2.0) + 4.0 * theta) * r2 / (s * s);
    RadialEigenvalues {
        radial: (df * theta + dn * theta * theta) / r2,
        tangential: theta * (df + 2.0 * theta - 4.0) / r2,
        radial_exact,
        tangential_exact,
    }
}

/// Both limit eigenvalues are non-negative: `d + 2 theta - 4 >= 0` and `1 + theta N/(d-N) >= 0`.
pub fn radial_admissible(theta: f64, n: f64, d: usize) -> bool {
    let df = d as f64;
    let ratio = if n.is_infinite() { -1.0 } else { n / (df - n) };
    df + 2.0 * theta - 4.0 >= 0.0 && 1.0 + theta * ratio >= 0.0
}

/// The exponent maximizing the radial curvature for `N < 0`: `-(d-N)/(2N)`.
pub fn hardy_theta(n: f64, d: usize) -> f64 {
    -(d as f64 - n) / (2.0 * n)
}

/// `(1/2 - 1/N) d >= 3`, the dimension condition of the Hardy-type bound.
pub fn hardy_dimension_condition(n: f64, d: usize) -> bool {
    if n == 0.0 {
        return true;
    }
    (0.5 - 1.0 / n) * d as f64 >= 3.0
}

/// Boundary data transformed to the conformal metric.
#[derive(Debug, Clone)]
pub struct ConformalBoundary {
    pub ii_g: Matrix,
    pub h_gmu: f64,
    pub measure_factor: f64,
}

/// `II_g = e^phi (II_0 + <dphi,n> Id)`, `H_gmu = e^-phi (H_0 - <dphi + dV, n>)`,
/// boundary measure factor `e^-phi`.
pub fn conformal_boundary(
    data: &ConformalMetricData,
    v: &dyn PotentialField,
    x: &Vector,
    n0: &Vector,
    ii0: &Matrix,
    h0: f64,
) -> Result<ConformalBoundary> {
    let norm = n0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitNormal { norm });
    }
    let phi = data.phi.value(x);
    let gp = data.phi.gradient(x);
    let m = ii0.nrows();
    let ii_g = (ii0 + Matrix::identity(m, m) * gp.dot(n0)) * phi.exp();
    let h_gmu = (-phi).exp() * (h0 - (gp + v.gradient(x)).dot(n0));
    Ok(ConformalBoundary { ii_g, h_gmu, measure_factor: (-phi).exp() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Lifted1D, LinearProfile, PowerProfile, Quadratic, Separable, ZeroPotential};

    #[test]
    fn gaussian_identity_transport() {
        let g: Arc<dyn PotentialField> = Arc::new(Quadratic::standard(2));
        let data = HessianMetricData { phi: g.clone(), v: g.clone(), w: g };
        let x = Vector::from_vec(vec![0.3, -0.8]);
        let r = hessian_ricci(&data, &x).unwrap();
        assert!(r.h.norm() < 1e-14);
        assert!((r.ric - Matrix::identity(2, 2)).norm() < 1e-14);
        assert!(hessian_h_lower_bound(&data, &x).unwrap().norm() < 1e-14);
        assert!((refined_q(&data, &x).unwrap() - Matrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn power_product_ricci_value() {
        let data = ProductMetricData::uniform(3, ProductProfile::Power { p: 0.5 });
        let v = Separable::uniform(3, Arc::new(LinearProfile { slope: 1.0, offset: 0.0 }));
        let r = product_ricci(&data, &v, &Vector::from_element(3, 1.0)).unwrap();
        assert!((r - Matrix::identity(3, 3) * 0.75).norm() < 1e-14);
    }

    #[test]
    fn exponential_product_ricci_bound() {
        let data = ProductMetricData::uniform(2, ProductProfile::Exp { lambda: 1.0 });
        let v = Separable::uniform(2, Arc::new(LinearProfile { slope: 2.0, offset: 0.0 }));
        let r = product_ricci(&data, &v, &Vector::from_vec(vec![0.3, 1.7])).unwrap();
        // lambda (V_i - lambda) = 1
        assert!((r - Matrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn ric_q_example() {
        let v = PowerProfile { c: 1.0, q: 1.5 };
        assert!((ric_1d_exact(&v, 1.0).unwrap() - 21.0 / 16.0).abs() < 1e-15);
        let g = crate::fields::QuadraticProfile { sigma: 1.0, center: 0.0 };
        assert_eq!(ric_1d_exact(&g, 0.4).unwrap(), 1.0);
    }

    #[test]
    fn entropic_ricci_of_gaussian_is_identity() {
        let v = Quadratic::standard(3);
        let x = Vector::from_vec(vec![0.1, 0.2, -0.3]);
        assert!((entropic_hessian_ricci(&v, &x).unwrap() - Matrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn entropic_matches_exact_in_one_dimension() {
        let prof = Arc::new(PowerProfile { c: 1.3, q: 1.7 });
        let v = Lifted1D(prof.clone());
        for x in [0.3, 0.9, 2.5] {
            let a = entropic_hessian_ricci(&v, &Vector::from_element(1, x)).unwrap()[(0, 0)];
            let b = ric_1d_exact(prof.as_ref(), x).unwrap();
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn conformal_flat_gaussian() {
        let data = ConformalMetricData { phi: Arc::new(ZeroPotential(3)), radial: None };
        let v = Quadratic::standard(3);
        let x = Vector::from_vec(vec![0.5, 0.1, -0.2]);
        let r = conformal_ricci_n(&data, &v, f64::INFINITY, &x).unwrap();
        assert!((r - Matrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn radial_example_values() {
        let d = 8;
        let n = -8.0;
        let theta = hardy_theta(n, d);
        assert_eq!(theta, 1.0);
        let e = radial_conformal_eigenvalues(theta, 0.0, n, d, 2.0);
        assert!((e.radial - 4.0 / 4.0).abs() < 1e-15);
        let bound = -(d as f64) * (d as f64 - n) / (4.0 * n) / 4.0;
        assert!((e.radial - bound).abs() < 1e-15);
        let z = radial_conformal_eigenvalues(0.0, 1e-3, n, d, 1.0);
        assert_eq!((z.radial, z.tangential), (0.0, 0.0));
    }

    #[test]
    fn radial_closed_form_matches_full_tensor() {
        let (d, theta, eps, n) = (5, 0.7, 0.05, -3.0);
        let data = ConformalMetricData::radial(d, theta, eps);
        let x = Vector::from_vec(vec![0.3, -0.2, 0.5, 0.1, 0.4]);
        let ric = conformal_ricci_n(&data, &ZeroPotential(d), n, &x).unwrap();
        let e = radial_conformal_eigenvalues(theta, eps, n, d, x.norm());
        let u = &x / x.norm();
        assert!((u.dot(&(&ric * &u)) - e.radial_exact).abs() < 1e-12);
        let mut t = Vector::from_vec(vec![0.2, 0.3, 0.0, 0.0, 0.0]);
        t -= &u * u.dot(&t);
        t /= t.norm();
        assert!((t.dot(&(&ric * &t)) - e.tangential_exact).abs() < 1e-12);
    }

    #[test]
    fn sphere_boundary_quantities() {
        let d = 4;
        for theta in [0.3, 1.0, 1.4] {
            let data = ConformalMetricData::radial(d, theta, 0.0);
            let x = Vector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
            let ii0 = Matrix::identity(d - 1, d - 1);
            let b = conformal_boundary(&data, &ZeroPotential(d), &x, &x, &ii0, (d - 1) as f64).unwrap();
            assert!((b.h_gmu - ((d - 1) as f64 + theta)).abs() < 1e-14);
            assert_eq!(min_eigenvalue(&b.ii_g) >= 0.0, theta <= 1.0);
            assert_eq!(b.measure_factor, 1.0);
        }
        let data = ConformalMetricData::radial(2, 1.0, 0.0);
        let bad = conformal_boundary(
            &data,
            &ZeroPotential(2),
            &Vector::from_vec(vec![1.0, 0.0]),
            &Vector::from_vec(vec![2.0, 0.0]),
            &Matrix::identity(1, 1),
            1.0,
        );
        assert!(matches!(bad, Err(Error::NonUnitNormal { .. })));
    }

    #[test]
    fn rho_constants() {
        assert_eq!(poly_product_rho(0.5, 1.0), 0.5);
        assert!((poly_product_rho(0.75, 1.0) - 0.75).abs() < 1e-15);
        assert_eq!(poly_product_rho_bounded(0.5, 1.0), 0.25);
    }

    #[test]
    fn small_condition_at_hardy_theta() {
        for d in 3..12 {
            for n in [-1.0, -2.0, -(d as f64), -50.0] {
                let theta = hardy_theta(n, d);
                // tangential >= radial bound iff the small condition holds
                let e = radial_conformal_eigenvalues(theta, 0.0, n, d, 1.0);
                let bound = -(d as f64) * (d as f64 - n) / (4.0 * n);
                assert!((e.radial - bound).abs() < 1e-9 * bound.abs());
                assert_eq!(e.tangential >= bound - 1e-12, hardy_dimension_condition(n, d), "d={d} n={n}");
            }
        }
    }
}
