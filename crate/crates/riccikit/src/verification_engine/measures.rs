//! Measure specifications and their sharded samplers.

use std::ops::Range;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex_geometry::ConvexBody;
use crate::error::{Error, Result};
use crate::fields::{
    AbsProfile, CoshProfile, LinearProfile, Matrix, NegLogCosProfile, PotentialField, PowerProfile, Profile1D, Quadratic,
    QuadLogCoshProfile, QuadraticProfile, Separable, Vector, ZeroPotential, ZeroProfile,
};
use crate::rng::stream;
use crate::tolerances::SAMPLE_BLOCKS;
use crate::transport_legendre::{CappedPowerPotential, Density1D};

fn one() -> f64 {
    1.0
}

/// A one-dimensional potential, used per coordinate of product measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// Constant potential (uniform law on a bounded interval).
    Flat,
    Linear { slope: f64 },
    Quadratic {
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default)]
        center: f64,
    },
    Abs { rate: f64 },
    Power { c: f64, q: f64 },
    /// `rate t - (shape - 1) log t` on `t > 0`.
    Gamma { shape: f64, rate: f64 },
    Cosh { scale: f64 },
    QuadLogCosh {
        a: f64,
        b: f64,
        #[serde(default)]
        shift: f64,
    },
    NegLogCos { width: f64 },
    CappedPower { q: f64 },
}

/// `rate t - (shape - 1) log t`.
#[derive(Debug, Clone, Copy)]
pub struct GammaProfile {
    pub shape: f64,
    pub rate: f64,
}

impl Profile1D for GammaProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        let k = self.shape - 1.0;
        if t <= 0.0 {
            return if k == 0.0 { [self.rate * t, self.rate, 0.0, 0.0, 0.0] } else { [f64::INFINITY, f64::NAN, f64::NAN, f64::NAN, f64::NAN] };
        }
        [self.rate * t - k * t.ln(), self.rate - k / t, k / (t * t), -2.0 * k / t.powi(3), 6.0 * k / t.powi(4)]
    }
}

impl ProfileSpec {
    pub fn profile(&self) -> Arc<dyn Profile1D> {
        match *self {
            ProfileSpec::Flat => Arc::new(ZeroProfile),
            ProfileSpec::Linear { slope } => Arc::new(LinearProfile { slope, offset: 0.0 }),
            ProfileSpec::Quadratic { sigma, center } => Arc::new(QuadraticProfile { sigma, center }),
            ProfileSpec::Abs { rate } => Arc::new(AbsProfile { rate }),
            ProfileSpec::Power { c, q } => Arc::new(PowerProfile { c, q }),
            ProfileSpec::Gamma { shape, rate } => Arc::new(GammaProfile { shape, rate }),
            ProfileSpec::Cosh { scale } => Arc::new(CoshProfile { scale }),
            ProfileSpec::QuadLogCosh { a, b, shift } => Arc::new(QuadLogCoshProfile { a, b, shift }),
            ProfileSpec::NegLogCos { width } => Arc::new(NegLogCosProfile { width }),
            ProfileSpec::CappedPower { q } => Arc::new(CappedPowerPotential { q }),
        }
    }

    /// Whether `V(-t) = V(t)`.
    pub fn is_even(&self) -> bool {
        match self {
            ProfileSpec::Flat | ProfileSpec::Abs { .. } | ProfileSpec::Cosh { .. } | ProfileSpec::NegLogCos { .. } | ProfileSpec::CappedPower { .. } => true,
            ProfileSpec::Quadratic { center, .. } => *center == 0.0,
            ProfileSpec::QuadLogCosh { shift, .. } => *shift == 0.0,
            _ => false,
        }
    }
}

/// A convex body given without its dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        #[serde(default = "one")]
        radius: f64,
    },
    Cube { lower: f64, upper: f64 },
    Simplex {
        #[serde(default = "one")]
        scale: f64,
    },
    LpBall {
        p: f64,
        #[serde(default = "one")]
        radius: f64,
    },
    Ellipse { a: f64, b: f64 },
}

impl BodySpec {
    pub fn body(&self, dim: usize) -> Result<ConvexBody> {
        let body = match *self {
            BodySpec::Ball { radius } => ConvexBody::Ball { dim, radius },
            BodySpec::Cube { lower, upper } => ConvexBody::Box { lower: vec![lower; dim], upper: vec![upper; dim] },
            BodySpec::Simplex { scale } => ConvexBody::Simplex { dim, scale },
            BodySpec::LpBall { p, radius } => ConvexBody::LpBall { dim, p, radius },
            BodySpec::Ellipse { a, b } => {
                if dim != 2 {
                    return Err(Error::InvalidParameter { name: "body".into(), reason: "an ellipse is two-dimensional".into() });
                }
                ConvexBody::Ellipse { a, b }
            }
        };
        body.validate()?;
        Ok(body)
    }
}

/// A probability measure on `R^d`, given without its dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Centered Gaussian with covariance `variance ((1 - rho) Id + rho 11^T)`.
    Gaussian {
        #[serde(default = "one")]
        variance: f64,
        #[serde(default)]
        correlation: f64,
    },
    /// Independent coordinates, each with density `exp(-profile)` on `[lower, upper]`
    /// (missing bounds are infinite).
    Product {
        profile: ProfileSpec,
        #[serde(default)]
        lower: Option<f64>,
        #[serde(default)]
        upper: Option<f64>,
    },
    /// `exp(-lambda s - kappa s^2 / 2)` with `s = sum x_i` on the positive orthant.
    SimplexRadial {
        lambda: f64,
        #[serde(default)]
        kappa: f64,
    },
    /// Normalized Lebesgue measure on a body.
    Uniform { body: BodySpec },
    /// Cone measure on the boundary of a body.
    Cone { body: BodySpec },
}

/// Radial law of `s = sum x_i` under [`MeasureSpec::SimplexRadial`]:
/// potential `lambda s + kappa s^2/2 - (d - 1) log s`.
#[derive(Debug, Clone, Copy)]
struct SimplexRadialProfile {
    lambda: f64,
    kappa: f64,
    dim: usize,
}

impl Profile1D for SimplexRadialProfile {
    fn derivatives(&self, s: f64) -> [f64; 5] {
        let k = self.dim as f64 - 1.0;
        if s <= 0.0 {
            return if k == 0.0 { [self.lambda * s, self.lambda, self.kappa, 0.0, 0.0] } else { [f64::INFINITY, f64::NAN, f64::NAN, f64::NAN, f64::NAN] };
        }
        [
            self.lambda * s + 0.5 * self.kappa * s * s - k * s.ln(),
            self.lambda + self.kappa * s - k / s,
            self.kappa + k / (s * s),
            -2.0 * k / s.powi(3),
            6.0 * k / s.powi(4),
        ]
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Gaussian { chol: Matrix },
    Product { density: Density1D },
    SimplexRadial { radial: Density1D },
    Uniform { body: ConvexBody },
    Cone { body: ConvexBody },
}

/// A measure resolved in a fixed dimension: potential plus exact sampler.
#[derive(Clone)]
pub struct Measure {
    pub spec: MeasureSpec,
    pub dim: usize,
    potential: Arc<dyn PotentialField>,
    sampler: Sampler,
}

impl std::fmt::Debug for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Measure").field("spec", &self.spec).field("dim", &self.dim).finish()
    }
}

/// `n` points split into contiguous blocks; each block is drawn from its own substream.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: Vec<Vector>,
    pub blocks: Vec<Range<usize>>,
    pub seed: u64,
    pub label: String,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Contiguous block ranges covering `0..n`, at most `SAMPLE_BLOCKS` of them.
pub fn block_ranges(n: usize) -> Vec<Range<usize>> {
    let count = SAMPLE_BLOCKS.min(n).max(1);
    let base = n / count;
    let extra = n % count;
    let mut start = 0;
    (0..count)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

impl Measure {
    pub fn new(spec: &MeasureSpec, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter { name: "dim".into(), reason: "must be positive".into() });
        }
        let (potential, sampler): (Arc<dyn PotentialField>, Sampler) = match spec {
            MeasureSpec::Gaussian { variance, correlation } => {
                let lo = -1.0 / (dim as f64 - 1.0).max(1.0);
                if !(*variance > 0.0) || !(*correlation > lo && *correlation < 1.0) && !(dim == 1 && *correlation == 0.0) {
                    return Err(Error::NonNormalizable(format!("covariance with variance {variance} and correlation {correlation}")));
                }
                let cov = (Matrix::identity(dim, dim) * (1.0 - correlation) + Matrix::from_element(dim, dim, *correlation)) * *variance;
                let chol = nalgebra::Cholesky::new(cov.clone()).ok_or_else(|| Error::NonNormalizable("covariance not positive definite".into()))?;
                let precision = chol.inverse();
                let l = chol.l();
                (Arc::new(Quadratic { a: crate::linalg::symmetrize(&precision), b: Vector::zeros(dim), c: 0.0 }), Sampler::Gaussian { chol: l })
            }
            MeasureSpec::Product { profile, lower, upper } => {
                let lo = lower.unwrap_or(f64::NEG_INFINITY);
                let hi = upper.unwrap_or(f64::INFINITY);
                let p = profile.profile();
                let density = Density1D::new(p.clone(), lo, hi).map_err(|e| Error::NonNormalizable(e.to_string()))?;
                (Arc::new(Separable::uniform(dim, p)), Sampler::Product { density })
            }
            MeasureSpec::SimplexRadial { lambda, kappa } => {
                if !(*lambda >= 0.0 && *kappa >= 0.0 && lambda + kappa > 0.0) {
                    return Err(Error::NonNormalizable(format!("lambda {lambda}, kappa {kappa}")));
                }
                let prof = SimplexRadialProfile { lambda: *lambda, kappa: *kappa, dim };
                let radial = Density1D::from_profile(prof, 0.0, f64::INFINITY).map_err(|e| Error::NonNormalizable(e.to_string()))?;
                let mut quad = Quadratic::sum_square(dim, *kappa);
                quad.b = Vector::from_element(dim, *lambda);
                (Arc::new(quad), Sampler::SimplexRadial { radial })
            }
            MeasureSpec::Uniform { body } => (Arc::new(ZeroPotential(dim)), Sampler::Uniform { body: body.body(dim)? }),
            MeasureSpec::Cone { body } => (Arc::new(ZeroPotential(dim)), Sampler::Cone { body: body.body(dim)? }),
        };
        Ok(Self { spec: spec.clone(), dim, potential, sampler })
    }

    /// Potential `V` with `mu` proportional to `exp(-V) dx` on the support.
    pub fn potential(&self) -> &Arc<dyn PotentialField> {
        &self.potential
    }

    /// The body for uniform and cone measures.
    pub fn body(&self) -> Option<&ConvexBody> {
        match &self.sampler {
            Sampler::Uniform { body } | Sampler::Cone { body } => Some(body),
            _ => None,
        }
    }

    /// Coordinate law of a product measure.
    pub fn coordinate_density(&self) -> Option<&Density1D> {
        match &self.sampler {
            Sampler::Product { density } => Some(density),
            _ => None,
        }
    }

    /// The 1D profile of a product measure.
    pub fn profile_spec(&self) -> Option<&ProfileSpec> {
        match &self.spec {
            MeasureSpec::Product { profile, .. } => Some(profile),
            _ => None,
        }
    }

    /// Coordinate-wise bounds `(lower, upper)` of the support (infinite where unbounded).
    pub fn coordinate_bounds(&self) -> (f64, f64) {
        match (&self.spec, &self.sampler) {
            (MeasureSpec::Product { lower, upper, .. }, _) => (lower.unwrap_or(f64::NEG_INFINITY), upper.unwrap_or(f64::INFINITY)),
            (MeasureSpec::SimplexRadial { .. }, _) => (0.0, f64::INFINITY),
            (_, Sampler::Uniform { body }) | (_, Sampler::Cone { body }) => match body {
                ConvexBody::Box { lower, upper } => (
                    lower.iter().copied().fold(f64::INFINITY, f64::min),
                    upper.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                ),
                ConvexBody::Simplex { scale, .. } => (0.0, *scale),
                other => {
                    let r = other.circumradius();
                    (-r, r)
                }
            },
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Largest `|x|` over the support (infinite when unbounded).
    pub fn support_radius(&self) -> f64 {
        match &self.sampler {
            Sampler::Uniform { body } | Sampler::Cone { body } => body.circumradius(),
            Sampler::Product { .. } => {
                let (lo, hi) = self.coordinate_bounds();
                lo.abs().max(hi.abs()) * (self.dim as f64).sqrt()
            }
            _ => f64::INFINITY,
        }
    }

    /// Whether the density is a function of `(|x_1|, ..., |x_d|)`.
    pub fn is_unconditional(&self) -> bool {
        match &self.spec {
            MeasureSpec::Gaussian { correlation, .. } => *correlation == 0.0,
            MeasureSpec::Product { profile, lower, upper } => {
                profile.is_even() && lower.map(|v| -v) == *upper
            }
            MeasureSpec::Uniform { body } | MeasureSpec::Cone { body } => {
                matches!(body, BodySpec::Ball { .. } | BodySpec::LpBall { .. } | BodySpec::Ellipse { .. })
                    || matches!(body, BodySpec::Cube { lower, upper } if *lower == -*upper)
            }
            MeasureSpec::SimplexRadial { .. } => false,
        }
    }

    /// One independent draw.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vector> {
        let d = self.dim;
        match &self.sampler {
            Sampler::Gaussian { chol } => {
                let z = Vector::from_fn(d, |_, _| StandardNormal.sample(rng));
                Ok(chol * z)
            }
            Sampler::Product { density } => Ok(Vector::from_fn(d, |_, _| density.sample(rng))),
            Sampler::SimplexRadial { radial } => {
                let s = radial.sample(rng);
                let e: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                Ok(Vector::from_fn(d, |i, _| s * e[i] / total))
            }
            Sampler::Uniform { body } => body.sample_uniform(rng),
            Sampler::Cone { body } => body.sample_cone(rng),
        }
    }

    /// `n` draws in blocks, block `b` from substream `(seed, label, b)`.
    /// The result does not depend on the number of worker threads.
    pub fn sample(&self, n: usize, seed: u64, label: &str) -> Result<SampleSet> {
        let blocks = block_ranges(n);
        let parts: Vec<Result<Vec<Vector>>> = blocks
            .par_iter()
            .enumerate()
            .map(|(b, r)| {
                let mut rng = stream(seed, label, b as u64);
                (0..r.len()).map(|_| self.sample_one(&mut rng)).collect()
            })
            .collect();
        let mut points = Vec::with_capacity(n);
        for p in parts {
            points.extend(p?);
        }
        Ok(SampleSet { points, blocks, seed, label: label.to_string() })
    }
}

/// `n` draws of `spec` in dimension `dim`.
pub fn sample_measure(spec: &MeasureSpec, dim: usize, n: usize, seed: u64) -> Result<SampleSet> {
    Measure::new(spec, dim)?.sample(n, seed, "sample")
}

/// Boundary points distributed by the cone measure of `body`, drawn as
/// antithetic pairs `(y, -y)` when the body is centrally symmetric.
/// Blocks hold whole pairs.
pub fn cone_boundary_sample(body: &ConvexBody, n: usize, seed: u64, label: &str) -> Result<SampleSet> {
    let symmetric = match body {
        ConvexBody::Ball { .. } | ConvexBody::LpBall { .. } | ConvexBody::Ellipse { .. } => true,
        ConvexBody::Box { lower, upper } => lower.iter().zip(upper).all(|(l, u)| *l == -*u),
        ConvexBody::Simplex { .. } => false,
    };
    let units = if symmetric { n.div_ceil(2) } else { n };
    let unit_blocks = block_ranges(units);
    let parts: Vec<Result<Vec<Vector>>> = unit_blocks
        .par_iter()
        .enumerate()
        .map(|(b, r)| {
            let mut rng = stream(seed, label, b as u64);
            let mut out = Vec::with_capacity(r.len() * 2);
            for _ in 0..r.len() {
                let y = body.sample_cone(&mut rng)?;
                if symmetric {
                    out.push(-&y);
                }
                out.push(y);
            }
            Ok(out)
        })
        .collect();
    let mut points = Vec::new();
    let mut blocks = Vec::with_capacity(parts.len());
    for p in parts {
        let p = p?;
        let start = points.len();
        points.extend(p);
        blocks.push(start..points.len());
    }
    Ok(SampleSet { points, blocks, seed, label: label.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(s: &SampleSet, i: usize) -> f64 {
        s.points.iter().map(|x| x[i]).sum::<f64>() / s.len() as f64
    }

    #[test]
    fn uniform_interval_mean() {
        let spec = MeasureSpec::Product { profile: ProfileSpec::Flat, lower: Some(0.0), upper: Some(1.0) };
        let n = 40_000;
        let s = sample_measure(&spec, 1, n, 3).unwrap();
        assert!((mean(&s, 0) - 0.5).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn exponential_marginals() {
        let spec = MeasureSpec::Product { profile: ProfileSpec::Linear { slope: 1.0 }, lower: Some(0.0), upper: None };
        let n = 40_000;
        let s = sample_measure(&spec, 3, n, 4).unwrap();
        for i in 0..3 {
            assert!((mean(&s, i) - 1.0).abs() < 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn simplex_radial_sum_law() {
        // with kappa = 0 the coordinates are iid Exp(lambda)
        let spec = MeasureSpec::SimplexRadial { lambda: 2.0, kappa: 0.0 };
        let n = 40_000;
        let s = sample_measure(&spec, 3, n, 5).unwrap();
        for i in 0..3 {
            assert!((mean(&s, i) - 0.5).abs() < 2.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn correlated_gaussian_covariance() {
        let spec = MeasureSpec::Gaussian { variance: 2.0, correlation: 0.5 };
        let n = 40_000;
        let s = sample_measure(&spec, 2, n, 6).unwrap();
        let c = s.points.iter().map(|x| x[0] * x[1]).sum::<f64>() / n as f64;
        assert!((c - 1.0).abs() < 0.05);
    }

    #[test]
    fn blocks_cover_and_sampling_is_deterministic() {
        let r = block_ranges(1001);
        assert_eq!(r.len(), SAMPLE_BLOCKS);
        assert_eq!(r.last().unwrap().end, 1001);
        let spec = MeasureSpec::Gaussian { variance: 1.0, correlation: 0.0 };
        let a = sample_measure(&spec, 2, 500, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| sample_measure(&spec, 2, 500, 9).unwrap());
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn antithetic_boundary_pairs() {
        let body = ConvexBody::Ball { dim: 3, radius: 2.0 };
        let s = cone_boundary_sample(&body, 100, 1, "b").unwrap();
        assert_eq!(s.len(), 100);
        for pair in s.points.chunks(2) {
            assert!((&pair[0] + &pair[1]).norm() < 1e-15);
            assert!((pair[0].norm() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn specs_parse_from_json() {
        let m: MeasureSpec = serde_json::from_str(r#"{"kind":"product","profile":{"kind":"power","c":1,"q":1.5},"lower":0}"#).unwrap();
        assert!(matches!(m, MeasureSpec::Product { .. }));
        assert!(serde_json::from_str::<MeasureSpec>(r#"{"kind":"gaussian","bogus":1}"#).is_err());
    }
}
