//! A small catalog of convex bodies containing the origin: gauges, outer
//! normals, boundary curvature, uniform and cone-measure sampling, and
//! boundary quadrature.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fields::{Matrix, Vector};
use crate::quadrature::gauss_legendre;
use crate::tolerances::GAUGE_MARGIN;

/// Bodies are star-shaped about the origin; the simplex and orthant box
/// have the origin as a boundary point and their gauge is finite only on
/// the closed positive orthant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexBody {
    Ball { dim: usize, radius: f64 },
    /// `prod [lower_i, upper_i]` with `lower_i <= 0 < upper_i`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `t * {x >= 0, sum x_i <= 1}`.
    Simplex { dim: usize, scale: f64 },
    LpBall { dim: usize, p: f64, radius: f64 },
    /// `(x/a)^2 + (y/b)^2 <= 1`.
    Ellipse { a: f64, b: f64 },
}

impl ConvexBody {
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { dim, .. } | ConvexBody::Simplex { dim, .. } | ConvexBody::LpBall { dim, .. } => *dim,
            ConvexBody::Box { lower, .. } => lower.len(),
            ConvexBody::Ellipse { .. } => 2,
        }
    }

    /// Checks parameters once at construction time.
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: &str| Err(Error::InvalidParameter { name: name.into(), reason: reason.into() });
        match self {
            ConvexBody::Ball { dim, radius } if *dim == 0 || !(*radius > 0.0) => bad("ball", "needs dim >= 1 and radius > 0"),
            ConvexBody::Box { lower, upper }
                if lower.is_empty() || lower.len() != upper.len() || lower.iter().zip(upper).any(|(l, u)| !(*l <= 0.0 && *u > 0.0)) =>
            {
                bad("box", "needs lower_i <= 0 < upper_i")
            }
            ConvexBody::Simplex { dim, scale } if *dim == 0 || !(*scale > 0.0) => bad("simplex", "needs dim >= 1 and scale > 0"),
            ConvexBody::LpBall { dim, p, radius } if *dim == 0 || !(*p > 1.0) || !(*radius > 0.0) => {
                bad("lp_ball", "needs p > 1 and radius > 0")
            }
            ConvexBody::Ellipse { a, b } if !(*a > 0.0 && *b > 0.0) => bad("ellipse", "needs positive semi-axes"),
            _ => Ok(()),
        }
    }

    /// `p(x) = min{t >= 0 : x in t K}`; `inf` outside the cone of definition.
    pub fn gauge(&self, x: &Vector) -> f64 {
        match self {
            ConvexBody::Ball { radius, .. } => x.norm() / radius,
            ConvexBody::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| {
                    if *v >= 0.0 {
                        v / u
                    } else if *l < 0.0 {
                        v / l
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(0.0, f64::max),
            ConvexBody::Simplex { scale, .. } => {
                if x.iter().any(|v| *v < 0.0) {
                    f64::INFINITY
                } else {
                    x.sum() / scale
                }
            }
            ConvexBody::LpBall { p, radius, .. } => lp_norm(x, *p) / radius,
            ConvexBody::Ellipse { a, b } => ((x[0] / a).powi(2) + (x[1] / b).powi(2)).sqrt(),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.gauge(x) <= 1.0
    }

    /// Gauge at `x` and the outer unit normal at the radial projection `x / p(x)`.
    pub fn gauge_and_normal(&self, x: &Vector) -> Result<(f64, Vector)> {
        let p = self.gauge(x);
        if p == 0.0 {
            return Err(Error::UndefinedAtOrigin);
        }
        if !p.is_finite() {
            return Err(Error::InvalidParameter { name: "x".into(), reason: "outside the cone of definition".into() });
        }
        let y = x / p;
        let n = match self {
            ConvexBody::Ball { .. } => y.normalize(),
            ConvexBody::Box { lower, upper } => {
                let mut n = Vector::zeros(y.len());
                for i in 0..y.len() {
                    if (y[i] / upper[i] - 1.0).abs() <= GAUGE_MARGIN {
                        n[i] = 1.0;
                    } else if lower[i] < 0.0 && (y[i] / lower[i] - 1.0).abs() <= GAUGE_MARGIN {
                        n[i] = -1.0;
                    }
                }
                n.normalize()
            }
            ConvexBody::Simplex { dim, .. } => Vector::from_element(*dim, 1.0 / (*dim as f64).sqrt()),
            ConvexBody::LpBall { p: q, .. } => y.map(|v| v.signum() * v.abs().powf(q - 1.0)).normalize(),
            ConvexBody::Ellipse { a, b } => Vector::from_vec(vec![y[0] / (a * a), y[1] / (b * b)]).normalize(),
        };
        Ok((p, n))
    }

    /// Second fundamental form (in an orthonormal tangent basis) and mean
    /// curvature at the radial projection of `x`.
    pub fn boundary_curvature(&self, x: &Vector) -> Result<(Matrix, f64)> {
        let (p, n) = self.gauge_and_normal(x)?;
        let y = x / p;
        let d = self.dim();
        let nonsmooth = || Error::NonSmoothBoundaryPoint { point: y.iter().copied().collect() };
        let (grad, hess) = match self {
            ConvexBody::Ball { radius, .. } => {
                let ii = Matrix::identity(d - 1, d - 1) / *radius;
                return Ok((ii, (d - 1) as f64 / radius));
            }
            ConvexBody::Box { .. } => {
                if n.iter().filter(|v| **v != 0.0).count() != 1 {
                    return Err(nonsmooth());
                }
                return Ok((Matrix::zeros(d - 1, d - 1), 0.0));
            }
            ConvexBody::Simplex { scale, .. } => {
                if y.iter().any(|v| *v <= GAUGE_MARGIN * scale) {
                    return Err(nonsmooth());
                }
                return Ok((Matrix::zeros(d - 1, d - 1), 0.0));
            }
            ConvexBody::LpBall { p: q, .. } => {
                if *q < 2.0 && y.iter().any(|v| v.abs() <= GAUGE_MARGIN) {
                    return Err(nonsmooth());
                }
                // level set of sum |y_i|^q
                let grad = y.map(|v| q * v.signum() * v.abs().powf(q - 1.0));
                let hess = Matrix::from_diagonal(&y.map(|v| q * (q - 1.0) * v.abs().powf(q - 2.0)));
                (grad, hess)
            }
            ConvexBody::Ellipse { a, b } => {
                let grad = Vector::from_vec(vec![2.0 * y[0] / (a * a), 2.0 * y[1] / (b * b)]);
                let hess = Matrix::from_diagonal(&Vector::from_vec(vec![2.0 / (a * a), 2.0 / (b * b)]));
                (grad, hess)
            }
        };
        let basis = tangent_basis(&n);
        let ii = basis.transpose() * hess * &basis / grad.norm();
        let h = ii.trace();
        Ok((crate::linalg::symmetrize(&ii), h))
    }

    /// `|x| / (p(x) <x, n(x/p(x))>)`, the operator norm of the differential of `x -> x/p(x)`.
    pub fn polar_map_norm(&self, x: &Vector) -> Result<f64> {
        let (p, n) = self.gauge_and_normal(x)?;
        let angle = x.dot(&n);
        if !(angle > 0.0) {
            return Err(Error::NonPositiveAngle { point: x.iter().copied().collect(), value: angle });
        }
        Ok(x.norm() / (p * angle))
    }

    pub fn volume(&self) -> f64 {
        match self {
            ConvexBody::Ball { dim, radius } => {
                let d = *dim as f64;
                (0.5 * d * std::f64::consts::PI.ln() - ln_gamma(0.5 * d + 1.0) + d * radius.ln()).exp()
            }
            ConvexBody::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| u - l).product(),
            ConvexBody::Simplex { dim, scale } => (*dim as f64 * scale.ln() - ln_gamma(*dim as f64 + 1.0)).exp(),
            ConvexBody::LpBall { dim, p, radius } => {
                let d = *dim as f64;
                (d * (2.0f64.ln() + ln_gamma(1.0 + 1.0 / p)) - ln_gamma(1.0 + d / p) + d * radius.ln()).exp()
            }
            ConvexBody::Ellipse { a, b } => std::f64::consts::PI * a * b,
        }
    }

    /// Largest distance from the origin to a point of the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            ConvexBody::Ball { radius, .. } => *radius,
            ConvexBody::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| l.abs().max(*u).powi(2)).sum::<f64>().sqrt()
            }
            ConvexBody::Simplex { scale, .. } => *scale,
            ConvexBody::LpBall { dim, p, radius } => radius * (*dim as f64).powf((0.5 - 1.0 / p).max(0.0)),
            ConvexBody::Ellipse { a, b } => a.max(*b),
        }
    }

    /// One point uniformly distributed in the body.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vector> {
        match self {
            ConvexBody::Ball { dim, radius } => {
                let g = gaussian_vector(rng, *dim);
                let r: f64 = rng.random::<f64>().powf(1.0 / *dim as f64);
                Ok(g.normalize() * (radius * r))
            }
            ConvexBody::Box { lower, upper } => {
                Ok(Vector::from_fn(lower.len(), |i, _| lower[i] + (upper[i] - lower[i]) * rng.random::<f64>()))
            }
            ConvexBody::Simplex { dim, scale } => {
                let e: Vec<f64> = (0..=*dim).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                Ok(Vector::from_fn(*dim, |i, _| scale * e[i] / total))
            }
            ConvexBody::LpBall { dim, radius, .. } => {
                for _ in 0..REJECTION_BUDGET {
                    let x = Vector::from_fn(*dim, |_, _| radius * (2.0 * rng.random::<f64>() - 1.0));
                    if self.gauge(&x) <= 1.0 {
                        return Ok(x);
                    }
                }
                Err(Error::RejectionBudgetExceeded { budget: REJECTION_BUDGET })
            }
            ConvexBody::Ellipse { a, b } => {
                let g = gaussian_vector(rng, 2).normalize() * rng.random::<f64>().sqrt();
                Ok(Vector::from_vec(vec![a * g[0], b * g[1]]))
            }
        }
    }

    /// One draw from the cone measure: `x / p(x)` with `x` uniform in the body.
    pub fn sample_cone<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vector> {
        loop {
            let x = self.sample_uniform(rng)?;
            let p = self.gauge(&x);
            if p > 0.0 {
                return Ok(x / p);
            }
        }
    }
}

/// Attempts per draw before rejection sampling gives up.
pub const REJECTION_BUDGET: usize = 1_000_000;

fn lp_norm(x: &Vector, p: f64) -> f64 {
    let m = x.amax();
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| StandardNormal.sample(rng))
}

/// Orthonormal basis of the complement of a unit vector, as columns.
pub fn tangent_basis(n: &Vector) -> Matrix {
    let d = n.len();
    // Householder reflection mapping e_k to n, with k the largest entry of n
    let k = n.iamax();
    let mut v = n.clone();
    v[k] -= if n[k] >= 0.0 { 1.0 } else { -1.0 };
    let vv = v.dot(&v);
    let reflect = if vv > 0.0 { Matrix::identity(d, d) - (&v * v.transpose()) * (2.0 / vv) } else { Matrix::identity(d, d) };
    let mut out = Matrix::zeros(d, d - 1);
    let mut c = 0;
    for j in 0..d {
        if j != k {
            out.set_column(c, &reflect.column(j));
            c += 1;
        }
    }
    out
}

/// Owns a seeded stream of cone-measure draws.
#[derive(Debug, Clone)]
pub struct ConeMeasureSampler {
    pub body: ConvexBody,
    rng: ChaCha8Rng,
}

impl ConeMeasureSampler {
    pub fn new(body: ConvexBody, rng: ChaCha8Rng) -> Result<Self> {
        body.validate()?;
        Ok(Self { body, rng })
    }

    pub fn sample(&mut self, count: usize) -> Result<Vec<Vector>> {
        (0..count).map(|_| self.body.sample_cone(&mut self.rng)).collect()
    }
}

/// `(min, max)` over samples and coordinates of `<n, e_i> / <n, x>` at the
/// radial projections of the samples.
pub fn diagonality_bounds(body: &ConvexBody, samples: &[Vector]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in samples {
        let (p, n) = body.gauge_and_normal(x)?;
        let y = x / p;
        let angle = n.dot(&y);
        if !(angle > 0.0) {
            return Err(Error::NonPositiveAngle { point: y.iter().copied().collect(), value: angle });
        }
        for v in n.iter() {
            lo = lo.min(v / angle);
            hi = hi.max(v / angle);
        }
    }
    Ok((lo, hi))
}

/// Nodes and probability weights integrating against the uniform measure on
/// the outer facet `{x >= 0, sum x_i = 1}` of the standard simplex, via
/// collapsed coordinates and an `m`-point Gauss rule per direction.
pub fn facet_quadrature(d: usize, m: usize) -> Vec<(Vector, f64)> {
    let (t, w) = gauss_legendre(m);
    let u: Vec<f64> = t.iter().map(|v| 0.5 * (v + 1.0)).collect();
    let wu: Vec<f64> = w.iter().map(|v| 0.5 * v).collect();
    let k = d - 1;
    let total = m.pow(k as u32);
    let mut out = Vec::with_capacity(total);
    let norm = (ln_gamma(d as f64)).exp();
    for idx in 0..total {
        let mut rest = 1.0;
        let mut weight = norm;
        let mut x = Vector::zeros(d);
        let mut code = idx;
        for j in 0..k {
            let a = code % m;
            code /= m;
            x[j] = rest * u[a];
            // Jacobian factor (1 - u_j)^{k-1-j}
            weight *= wu[a] * (1.0 - u[a]).powi((k - 1 - j) as i32);
            rest *= 1.0 - u[a];
        }
        x[k] = rest;
        out.push((x, weight));
    }
    out
}

/// Mean of `f` under the uniform measure on the unit sphere `S^{d-1}` from
/// `pairs` antithetic pairs `(u, -u)`; returns `(mean, standard error)`.
pub fn sphere_average<R: Rng + ?Sized>(d: usize, pairs: usize, rng: &mut R, f: impl Fn(&Vector) -> f64) -> (f64, f64) {
    let vals: Vec<f64> = (0..pairs)
        .map(|_| {
            let u = gaussian_vector(rng, d).normalize();
            0.5 * (f(&u) + f(&(-&u)))
        })
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}
