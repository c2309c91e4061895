//! Scalar potentials, one-dimensional profiles, and metric fields.
//!
//! A potential is anything with a value, gradient and Hessian; third and
//! fourth derivatives are optional and only some consumers need them.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// A smooth scalar field on (a subset of) `R^d`.
pub trait PotentialField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn hessian(&self, x: &Vector) -> Matrix;
    /// `result[k] = d/dx_k of the Hessian`, when known in closed form.
    fn third(&self, _x: &Vector) -> Option<Vec<Matrix>> {
        None
    }
    /// `result[k * d + l] = d^2/(dx_k dx_l) of the Hessian`, when known in closed form.
    fn fourth(&self, _x: &Vector) -> Option<Vec<Matrix>> {
        None
    }
}

/// A Riemannian metric given in coordinates.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;
    fn metric(&self, x: &Vector) -> Matrix;
    /// `d g / d x_k` in closed form, if available.
    fn metric_derivative(&self, _x: &Vector, _k: usize) -> Option<Matrix> {
        None
    }
    /// Whether `x` lies in the open coordinate domain.
    fn contains(&self, _x: &Vector) -> bool {
        true
    }
}

/// One-dimensional function with derivatives `[f, f', f'', f''', f'''']`.
pub trait Profile1D: Send + Sync {
    fn derivatives(&self, t: f64) -> [f64; 5];
    fn value(&self, t: f64) -> f64 {
        self.derivatives(t)[0]
    }
}

// ---------------------------------------------------------------------------
// 1D profiles

/// `c t^q` on `t > 0`.
#[derive(Debug, Clone, Copy)]
pub struct PowerProfile {
    pub c: f64,
    pub q: f64,
}

impl Profile1D for PowerProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        let (c, q) = (self.c, self.q);
        if t <= 0.0 {
            if q == 1.0 {
                return [c * t, c, 0.0, 0.0, 0.0];
            }
            return [f64::NAN; 5];
        }
        let v = c * t.powf(q);
        [
            v,
            c * q * t.powf(q - 1.0),
            c * q * (q - 1.0) * t.powf(q - 2.0),
            c * q * (q - 1.0) * (q - 2.0) * t.powf(q - 3.0),
            c * q * (q - 1.0) * (q - 2.0) * (q - 3.0) * t.powf(q - 4.0),
        ]
    }
}

/// `slope * t + offset`.
#[derive(Debug, Clone, Copy)]
pub struct LinearProfile {
    pub slope: f64,
    pub offset: f64,
}

impl Profile1D for LinearProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        [self.slope * t + self.offset, self.slope, 0.0, 0.0, 0.0]
    }
}

/// `(t - center)^2 / (2 sigma^2)`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticProfile {
    pub sigma: f64,
    pub center: f64,
}

impl Profile1D for QuadraticProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        let s2 = self.sigma * self.sigma;
        let u = t - self.center;
        [0.5 * u * u / s2, u / s2, 1.0 / s2, 0.0, 0.0]
    }
}

/// `rate |t|`; the kink at zero is a null set for every consumer.
#[derive(Debug, Clone, Copy)]
pub struct AbsProfile {
    pub rate: f64,
}

impl Profile1D for AbsProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        [self.rate * t.abs(), self.rate * t.signum(), 0.0, 0.0, 0.0]
    }
}

/// `-log cos(pi t / width)` on `|t| < width / 2`.
#[derive(Debug, Clone, Copy)]
pub struct NegLogCosProfile {
    pub width: f64,
}

impl Profile1D for NegLogCosProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        let w = std::f64::consts::PI / self.width;
        let (s, c) = (w * t).sin_cos();
        if c <= 0.0 {
            return [f64::INFINITY, f64::NAN, f64::NAN, f64::NAN, f64::NAN];
        }
        let tan = s / c;
        let sec2 = 1.0 / (c * c);
        [
            -c.ln(),
            w * tan,
            w * w * sec2,
            2.0 * w.powi(3) * sec2 * tan,
            2.0 * w.powi(4) * (2.0 * sec2 * tan * tan + sec2 * sec2),
        ]
    }
}

/// `a cosh(t)`.
#[derive(Debug, Clone, Copy)]
pub struct CoshProfile {
    pub scale: f64,
}

impl Profile1D for CoshProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        let (c, s) = (t.cosh() * self.scale, t.sinh() * self.scale);
        [c, s, c, s, c]
    }
}

/// `a t^2/2 + b log cosh(t)`: strictly convex for `a > 0`, `b >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct QuadLogCoshProfile {
    pub a: f64,
    pub b: f64,
    pub shift: f64,
}

impl Profile1D for QuadLogCoshProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        let u = t - self.shift;
        let th = u.tanh();
        let sech2 = 1.0 - th * th;
        // log cosh computed stably for large |u|
        let lc = u.abs() + (-2.0 * u.abs()).exp().ln_1p() - std::f64::consts::LN_2;
        [
            0.5 * self.a * t * t + self.b * lc,
            self.a * t + self.b * th,
            self.a + self.b * sech2,
            self.b * (-2.0 * th * sech2),
            self.b * (-2.0 * sech2 * sech2 + 4.0 * th * th * sech2),
        ]
    }
}

/// Identically zero.
#[derive(Debug, Clone, Copy)]
pub struct ZeroProfile;

impl Profile1D for ZeroProfile {
    fn derivatives(&self, _t: f64) -> [f64; 5] {
        [0.0; 5]
    }
}

/// A profile defined by a closure returning all five derivatives.
#[derive(Clone)]
pub struct FnProfile(pub Arc<dyn Fn(f64) -> [f64; 5] + Send + Sync>);

impl Profile1D for FnProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        (self.0)(t)
    }
}

// ---------------------------------------------------------------------------
// d-dimensional potentials

/// `x^T A x / 2 + b.x + c`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub a: Matrix,
    pub b: Vector,
    pub c: f64,
}

impl Quadratic {
    /// `|x|^2 / 2` in dimension `d`.
    pub fn standard(d: usize) -> Self {
        Self { a: Matrix::identity(d, d), b: Vector::zeros(d), c: 0.0 }
    }

    pub fn scaled_identity(d: usize, k: f64) -> Self {
        Self { a: Matrix::identity(d, d) * k, b: Vector::zeros(d), c: 0.0 }
    }

    /// `kappa/2 (sum_i x_i)^2`.
    pub fn sum_square(d: usize, kappa: f64) -> Self {
        Self { a: Matrix::from_element(d, d, kappa), b: Vector::zeros(d), c: 0.0 }
    }
}

impl PotentialField for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x) + self.c
    }
    fn gradient(&self, x: &Vector) -> Vector {
        &self.a * x + &self.b
    }
    fn hessian(&self, _x: &Vector) -> Matrix {
        self.a.clone()
    }
    fn third(&self, _x: &Vector) -> Option<Vec<Matrix>> {
        let d = self.dim();
        Some(vec![Matrix::zeros(d, d); d])
    }
    fn fourth(&self, _x: &Vector) -> Option<Vec<Matrix>> {
        let d = self.dim();
        Some(vec![Matrix::zeros(d, d); d * d])
    }
}

/// Quadratic plus a sum of exponentials `sum_k c_k exp(w_k . x)`; every
/// derivative is available in closed form.
#[derive(Debug, Clone)]
pub struct ExpQuadratic {
    pub quadratic: Quadratic,
    pub terms: Vec<(f64, Vector)>,
}

impl ExpQuadratic {
    fn weights(&self, x: &Vector) -> Vec<f64> {
        self.terms.iter().map(|(c, w)| c * w.dot(x).exp()).collect()
    }
}

impl PotentialField for ExpQuadratic {
    fn dim(&self) -> usize {
        self.quadratic.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.quadratic.value(x) + self.weights(x).iter().sum::<f64>()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = self.quadratic.gradient(x);
        for (e, (_, w)) in self.weights(x).iter().zip(&self.terms) {
            g += w * *e;
        }
        g
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        let mut h = self.quadratic.a.clone();
        for (e, (_, w)) in self.weights(x).iter().zip(&self.terms) {
            h += (w * w.transpose()) * *e;
        }
        h
    }
    fn third(&self, x: &Vector) -> Option<Vec<Matrix>> {
        let d = self.dim();
        let mut out = vec![Matrix::zeros(d, d); d];
        for (e, (_, w)) in self.weights(x).iter().zip(&self.terms) {
            let ww = w * w.transpose();
            for (k, m) in out.iter_mut().enumerate() {
                *m += &ww * (*e * w[k]);
            }
        }
        Some(out)
    }
    fn fourth(&self, x: &Vector) -> Option<Vec<Matrix>> {
        let d = self.dim();
        let mut out = vec![Matrix::zeros(d, d); d * d];
        for (e, (_, w)) in self.weights(x).iter().zip(&self.terms) {
            let ww = w * w.transpose();
            for k in 0..d {
                for l in 0..d {
                    out[k * d + l] += &ww * (*e * w[k] * w[l]);
                }
            }
        }
        Some(out)
    }
}

/// `sum_i v_i(x_i)`.
#[derive(Clone)]
pub struct Separable {
    pub profiles: Vec<Arc<dyn Profile1D>>,
}

impl Separable {
    pub fn uniform(d: usize, profile: Arc<dyn Profile1D>) -> Self {
        Self { profiles: vec![profile; d] }
    }
    fn all(&self, x: &Vector) -> Vec<[f64; 5]> {
        self.profiles.iter().zip(x.iter()).map(|(p, t)| p.derivatives(*t)).collect()
    }
}

impl PotentialField for Separable {
    fn dim(&self) -> usize {
        self.profiles.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.all(x).iter().map(|v| v[0]).sum()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_iterator(self.dim(), self.all(x).iter().map(|v| v[1]))
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        Matrix::from_diagonal(&Vector::from_iterator(self.dim(), self.all(x).iter().map(|v| v[2])))
    }
    fn third(&self, x: &Vector) -> Option<Vec<Matrix>> {
        let d = self.dim();
        let all = self.all(x);
        Some(
            (0..d)
                .map(|k| {
                    let mut m = Matrix::zeros(d, d);
                    m[(k, k)] = all[k][3];
                    m
                })
                .collect(),
        )
    }
    fn fourth(&self, x: &Vector) -> Option<Vec<Matrix>> {
        let d = self.dim();
        let all = self.all(x);
        let mut out = vec![Matrix::zeros(d, d); d * d];
        for k in 0..d {
            out[k * d + k][(k, k)] = all[k][4];
        }
        Some(out)
    }
}

/// Pointwise sum of potentials.
#[derive(Clone)]
pub struct SumPotential {
    pub parts: Vec<Arc<dyn PotentialField>>,
}

impl PotentialField for SumPotential {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.parts.iter().map(|p| p.value(x)).sum()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        self.parts.iter().fold(Vector::zeros(self.dim()), |acc, p| acc + p.gradient(x))
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        let d = self.dim();
        self.parts.iter().fold(Matrix::zeros(d, d), |acc, p| acc + p.hessian(x))
    }
    fn third(&self, x: &Vector) -> Option<Vec<Matrix>> {
        let mut acc: Option<Vec<Matrix>> = None;
        for p in &self.parts {
            let t = p.third(x)?;
            acc = Some(match acc {
                None => t,
                Some(a) => a.into_iter().zip(t).map(|(u, v)| u + v).collect(),
            });
        }
        acc
    }
    fn fourth(&self, x: &Vector) -> Option<Vec<Matrix>> {
        let mut acc: Option<Vec<Matrix>> = None;
        for p in &self.parts {
            let t = p.fourth(x)?;
            acc = Some(match acc {
                None => t,
                Some(a) => a.into_iter().zip(t).map(|(u, v)| u + v).collect(),
            });
        }
        acc
    }
}

/// `-(theta/2) log(|x|^2 + eps)`, the radial conformal exponent.
#[derive(Debug, Clone, Copy)]
pub struct RadialLog {
    pub dim: usize,
    pub theta: f64,
    pub eps: f64,
}

impl PotentialField for RadialLog {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        -0.5 * self.theta * (x.norm_squared() + self.eps).ln()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        x * (-self.theta / (x.norm_squared() + self.eps))
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        let s = x.norm_squared() + self.eps;
        let d = self.dim;
        (Matrix::identity(d, d) / s - (x * x.transpose()) * (2.0 / (s * s))) * (-self.theta)
    }
    fn third(&self, x: &Vector) -> Option<Vec<Matrix>> {
        // d/dx_k [ -theta (I/s - 2 x x^T / s^2) ]
        let s = x.norm_squared() + self.eps;
        let d = self.dim;
        let xxt = x * x.transpose();
        Some(
            (0..d)
                .map(|k| {
                    let mut ek_x = Matrix::zeros(d, d);
                    for i in 0..d {
                        ek_x[(k, i)] += x[i];
                        ek_x[(i, k)] += x[i];
                    }
                    let m = Matrix::identity(d, d) * (-2.0 * x[k] / (s * s)) - ek_x * (2.0 / (s * s))
                        + &xxt * (8.0 * x[k] / (s * s * s));
                    m * (-self.theta)
                })
                .collect(),
        )
    }
}

/// Identically zero potential in dimension `d`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroPotential(pub usize);

impl PotentialField for ZeroPotential {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn gradient(&self, _x: &Vector) -> Vector {
        Vector::zeros(self.0)
    }
    fn hessian(&self, _x: &Vector) -> Matrix {
        Matrix::zeros(self.0, self.0)
    }
    fn third(&self, _x: &Vector) -> Option<Vec<Matrix>> {
        Some(vec![Matrix::zeros(self.0, self.0); self.0])
    }
    fn fourth(&self, _x: &Vector) -> Option<Vec<Matrix>> {
        Some(vec![Matrix::zeros(self.0, self.0); self.0 * self.0])
    }
}

type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;
type TensorFn = Arc<dyn Fn(&Vector) -> Vec<Matrix> + Send + Sync>;

/// A potential assembled from closures.
#[derive(Clone)]
pub struct FnPotential {
    pub dim: usize,
    pub value: ScalarFn,
    pub gradient: VectorFn,
    pub hessian: MatrixFn,
    pub third: Option<TensorFn>,
}

impl PotentialField for FnPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        (self.hessian)(x)
    }
    fn third(&self, x: &Vector) -> Option<Vec<Matrix>> {
        self.third.as_ref().map(|f| f(x))
    }
}

/// One-dimensional potential lifted to `R^1`.
#[derive(Clone)]
pub struct Lifted1D(pub Arc<dyn Profile1D>);

impl PotentialField for Lifted1D {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &Vector) -> f64 {
        self.0.value(x[0])
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_element(1, self.0.derivatives(x[0])[1])
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        Matrix::from_element(1, 1, self.0.derivatives(x[0])[2])
    }
    fn third(&self, x: &Vector) -> Option<Vec<Matrix>> {
        Some(vec![Matrix::from_element(1, 1, self.0.derivatives(x[0])[3])])
    }
    fn fourth(&self, x: &Vector) -> Option<Vec<Matrix>> {
        Some(vec![Matrix::from_element(1, 1, self.0.derivatives(x[0])[4])])
    }
}

// ---------------------------------------------------------------------------
// Metrics

/// The flat metric `g = Id`.
#[derive(Debug, Clone, Copy)]
pub struct Euclidean(pub usize);

impl MetricField for Euclidean {
    fn dim(&self) -> usize {
        self.0
    }
    fn metric(&self, _x: &Vector) -> Matrix {
        Matrix::identity(self.0, self.0)
    }
    fn metric_derivative(&self, _x: &Vector, _k: usize) -> Option<Matrix> {
        Some(Matrix::zeros(self.0, self.0))
    }
}

/// Hides closed-form derivatives so that every consumer falls back to stencils.
pub struct StencilOnly<'a>(pub &'a dyn MetricField);

impl MetricField for StencilOnly<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn metric(&self, x: &Vector) -> Matrix {
        self.0.metric(x)
    }
    fn contains(&self, x: &Vector) -> bool {
        self.0.contains(x)
    }
}

/// A metric given by a closure, optionally restricted to a domain.
#[derive(Clone)]
pub struct FnMetric {
    pub dim: usize,
    pub metric: MatrixFn,
    pub domain: Option<Arc<dyn Fn(&Vector) -> bool + Send + Sync>>,
}

impl MetricField for FnMetric {
    fn dim(&self) -> usize {
        self.dim
    }
    fn metric(&self, x: &Vector) -> Matrix {
        (self.metric)(x)
    }
    fn contains(&self, x: &Vector) -> bool {
        self.domain.as_ref().is_none_or(|f| f(x))
    }
}
