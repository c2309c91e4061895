//! Block-sum estimators for both sides of an inequality, with a block bootstrap.
//!
//! Each sample block is reduced to a vector of channel sums in parallel;
//! every statistic is a smooth functional of channel means, so bootstrap
//! replicates only re-aggregate block sums. The same resampling plan is
//! used for every function of one check, which keeps the LHS and RHS
//! replicates of a row paired.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{Matrix, Vector};
use crate::inequality_catalog::{ExtraTerm, InequalityInstance, LhsKind};
use crate::linalg::{max_eigenvalue, symmetrize};
use crate::rng::stream;
use crate::tolerances::{BOOTSTRAP_RESAMPLES, ENTROPY_CLIP, GAUGE_MARGIN, MIN_SAMPLES};

use super::functions::TestFunction;
use super::measures::SampleSet;

/// Value with a bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Both sides of one row.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub function: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub slack: Estimate,
    /// Fraction of interior points skipped as singular.
    pub clipped: f64,
}

/// Per-block channel sums plus point counts.
#[derive(Debug, Clone)]
pub struct BlockSums {
    pub width: usize,
    pub counts: Vec<f64>,
    pub sums: Vec<Vec<f64>>,
}

impl BlockSums {
    /// Reduces `points` block by block; `channels` fills one row per point
    /// and returns `false` to skip the point.
    pub fn collect(samples: &SampleSet, width: usize, channels: impl Fn(&Vector, &mut [f64]) -> Result<bool> + Sync) -> Result<Self> {
        let parts: Vec<Result<(f64, Vec<f64>)>> = samples
            .blocks
            .par_iter()
            .map(|range| {
                let mut acc = vec![0.0; width];
                let mut row = vec![0.0; width];
                let mut count = 0.0;
                for x in &samples.points[range.clone()] {
                    row.iter_mut().for_each(|v| *v = 0.0);
                    if channels(x, &mut row)? {
                        count += 1.0;
                        for (a, r) in acc.iter_mut().zip(&row) {
                            *a += r;
                        }
                    }
                }
                Ok((count, acc))
            })
            .collect();
        let mut counts = Vec::with_capacity(parts.len());
        let mut sums = Vec::with_capacity(parts.len());
        for p in parts {
            let (c, s) = p?;
            counts.push(c);
            sums.push(s);
        }
        Ok(Self { width, counts, sums })
    }

    /// Point count and channel means over the listed blocks (with repetition).
    pub fn means(&self, blocks: impl IntoIterator<Item = usize>) -> (f64, Vec<f64>) {
        let mut acc = vec![0.0; self.width];
        let mut count = 0.0;
        for b in blocks {
            count += self.counts[b];
            for (a, s) in acc.iter_mut().zip(&self.sums[b]) {
                *a += s;
            }
        }
        if count > 0.0 {
            acc.iter_mut().for_each(|v| *v /= count);
        }
        (count, acc)
    }

    pub fn all(&self) -> (f64, Vec<f64>) {
        self.means(0..self.counts.len())
    }
}

/// `resamples` block-index lists, each drawing `blocks` indices with replacement.
pub fn bootstrap_plan(blocks: usize, resamples: usize, seed: u64, label: &str) -> Vec<Vec<usize>> {
    let mut rng = stream(seed, label, 0);
    (0..resamples).map(|_| (0..blocks).map(|_| rng.random_range(0..blocks)).collect()).collect()
}

/// Sample standard deviation.
pub fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// `n/(n-1) (E f^2 - (E f)^2)`.
pub fn unbiased_variance(n: f64, m1: f64, m2: f64) -> f64 {
    n / (n - 1.0) * (m2 - m1 * m1)
}

/// `E[g log g] - E[g] log E[g]` from the two means.
pub fn plugin_entropy(mean_glogg: f64, mean_g: f64) -> f64 {
    mean_glogg - mean_g * mean_g.max(ENTROPY_CLIP).ln()
}

/// `g log g` with `g` clipped away from zero.
pub fn glogg(g: f64) -> f64 {
    g * g.max(ENTROPY_CLIP).ln()
}

const PER_FUNCTION: usize = 5;
const F: usize = 0;
const F2: usize = 1;
const F2LOG: usize = 2;
const Q: usize = 3;
const GRAD2: usize = 4;

/// Layout of the interior channels of one check.
struct Layout {
    dim: usize,
    /// Number of `ExtraTerm` point fields.
    fields: usize,
    functions: usize,
}

impl Layout {
    fn shared(&self) -> usize {
        self.dim + self.fields
    }
    fn width(&self) -> usize {
        self.shared() + PER_FUNCTION * self.functions
    }
    fn at(&self, j: usize, c: usize) -> usize {
        self.shared() + PER_FUNCTION * j + c
    }
}

/// Interior and boundary block sums for `functions` under `instance`.
pub struct Accumulated {
    layout: Layout,
    interior: BlockSums,
    boundary: Option<BlockSums>,
    clipped: f64,
}

/// Radius below which singular weights are not evaluated.
fn origin_margin(samples: &SampleSet) -> f64 {
    let scale = samples.points.iter().take(1000).map(|x| x.amax()).fold(0.0, f64::max);
    GAUGE_MARGIN * scale.max(1.0)
}

pub fn accumulate(instance: &InequalityInstance, functions: &[TestFunction], interior: &SampleSet, boundary: Option<&SampleSet>) -> Result<Accumulated> {
    if interior.len() < MIN_SAMPLES {
        return Err(Error::DegenerateSample { n: interior.len(), min: MIN_SAMPLES });
    }
    let d = instance.dim;
    let point_fields: Vec<_> = instance
        .extras
        .iter()
        .filter_map(|e| match e {
            ExtraTerm::FieldMean { field, .. } | ExtraTerm::FieldMeanDirichlet { field, .. } => Some(field.clone()),
            _ => None,
        })
        .collect();
    let layout = Layout { dim: d, fields: point_fields.len(), functions: functions.len() };
    let delta = origin_margin(interior);
    let interior_sums = BlockSums::collect(interior, layout.width(), |x, row| {
        if x.norm() < delta && instance.singular_at_origin {
            return Ok(false);
        }
        for i in 0..d {
            row[i] = x[i] * x[i];
        }
        for (k, field) in point_fields.iter().enumerate() {
            let v = field(x)?;
            if !v.is_finite() {
                return Ok(false);
            }
            row[d + k] = v;
        }
        let w = instance.rhs_weight.at(x)?;
        for (j, f) in functions.iter().enumerate() {
            let v = f.eval(x);
            let g = f.grad(x);
            let q = w.form(&g);
            if !(v.is_finite() && q.is_finite()) {
                return Ok(false);
            }
            let v2 = v * v;
            row[layout.at(j, F)] = v;
            row[layout.at(j, F2)] = v2;
            row[layout.at(j, F2LOG)] = glogg(v2);
            row[layout.at(j, Q)] = q;
            row[layout.at(j, GRAD2)] = g.norm_squared();
        }
        Ok(true)
    })?;
    let total: f64 = interior_sums.counts.iter().sum();
    let clipped = 1.0 - total / interior.len() as f64;

    let boundary_sums = match (&instance.boundary, boundary) {
        (Some(term), Some(samples)) => {
            let body = &term.body;
            let df = d as f64;
            Some(BlockSums::collect(samples, 1 + 2 * functions.len(), |y, row| {
                let (p, n) = body.gauge_and_normal(y).map_err(|e| Error::BoundaryQuadratureFailure(e.to_string()))?;
                let y = y / p;
                let angle = y.dot(&n);
                if !(angle > 0.0) {
                    return Err(Error::BoundaryQuadratureFailure(format!("non-positive angle {angle:e}")));
                }
                let omega = term.scale * (term.weight)(&y, &n)? * df / angle;
                if !omega.is_finite() {
                    return Ok(false);
                }
                row[0] = omega;
                for (j, f) in functions.iter().enumerate() {
                    let v = f.eval(&y);
                    row[1 + 2 * j] = omega * v;
                    row[2 + 2 * j] = omega * v * v;
                }
                Ok(true)
            })?)
        }
        (Some(_), None) => return Err(Error::BoundaryQuadratureFailure("boundary samples missing".into())),
        _ => None,
    };
    Ok(Accumulated { layout, interior: interior_sums, boundary: boundary_sums, clipped })
}

/// Both sides for function `j` from aggregated means.
fn sides(instance: &InequalityInstance, layout: &Layout, j: usize, (n, m): (f64, &[f64]), bnd: Option<&[f64]>, probe: Option<f64>) -> (f64, f64) {
    let f = m[layout.at(j, F)];
    let f2 = m[layout.at(j, F2)];
    let raw = match instance.lhs_kind {
        LhsKind::Variance => unbiased_variance(n, f, f2),
        LhsKind::EntropyOfSquare => plugin_entropy(m[layout.at(j, F2LOG)], f2),
        LhsKind::L2Dirichlet => f2,
    };
    let lhs = instance.lhs_scale * raw;
    let grad2 = m[layout.at(j, GRAD2)];
    let mut rhs = instance.rhs_constant * m[layout.at(j, Q)];
    let mut field = layout.dim;
    for extra in &instance.extras {
        match extra {
            ExtraTerm::CoordinateMomentDirichlet => {
                let max_moment = m[..layout.dim].iter().copied().fold(0.0, f64::max);
                rhs += max_moment * grad2;
            }
            ExtraTerm::FieldMean { scale, .. } => {
                rhs += scale * m[field];
                field += 1;
            }
            ExtraTerm::FieldMeanDirichlet { scale, .. } => {
                rhs += scale * m[field] * grad2;
                field += 1;
            }
            ExtraTerm::PoincareProbe { scale } => rhs += scale * probe.unwrap_or(f64::NAN),
        }
    }
    if let (Some(term), Some(b)) = (&instance.boundary, bnd) {
        let (w, wf, wf2) = (b[0], b[1 + 2 * j], b[2 + 2 * j]);
        rhs += if term.free_constant { wf2 - wf * wf / w } else { wf2 };
    }
    (lhs, rhs)
}

impl Accumulated {
    pub fn clipped(&self) -> f64 {
        self.clipped
    }

    /// Coefficient of `int |grad f|^2` collected from the extra terms.
    pub fn dirichlet_coefficient(&self, instance: &InequalityInstance) -> f64 {
        let (_, m) = self.interior.all();
        let mut field = self.layout.dim;
        let mut total = 0.0;
        for extra in &instance.extras {
            match extra {
                ExtraTerm::CoordinateMomentDirichlet => total += m[..self.layout.dim].iter().copied().fold(0.0, f64::max),
                ExtraTerm::FieldMean { .. } => field += 1,
                ExtraTerm::FieldMeanDirichlet { scale, .. } => {
                    total += scale * m[field];
                    field += 1;
                }
                ExtraTerm::PoincareProbe { .. } => {}
            }
        }
        total
    }

    /// Rows for every function, with bootstrap errors from `plans`
    /// (interior plan, boundary plan) and an optional probe per replicate.
    pub fn evaluate(&self, instance: &InequalityInstance, functions: &[TestFunction], plans: &Plans, probe: Option<&ProbeSums>) -> Vec<Evaluation> {
        let full_int = self.interior.all();
        let full_bnd = self.boundary.as_ref().map(|b| b.all().1);
        let full_probe = probe.map(|p| p.lower_bound(0..p.blocks()));
        let replicates: Vec<((f64, Vec<f64>), Option<Vec<f64>>, Option<f64>)> = (0..plans.interior.len())
            .map(|r| {
                let int = self.interior.means(plans.interior[r].iter().copied());
                let bnd = self.boundary.as_ref().map(|b| b.means(plans.boundary[r].iter().copied()).1);
                let pr = probe.map(|p| p.lower_bound(plans.interior[r].iter().copied()));
                (int, bnd, pr)
            })
            .collect();
        functions
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let (lhs, rhs) = sides(instance, &self.layout, j, (full_int.0, &full_int.1), full_bnd.as_deref(), full_probe);
                let mut ls = Vec::with_capacity(replicates.len());
                let mut rs = Vec::with_capacity(replicates.len());
                let mut ss = Vec::with_capacity(replicates.len());
                for ((n, m), b, p) in &replicates {
                    let (l, r) = sides(instance, &self.layout, j, (*n, m), b.as_deref(), *p);
                    ls.push(l);
                    rs.push(r);
                    ss.push(r - l);
                }
                let pad = self.clipped * (lhs.abs() + rhs.abs());
                Evaluation {
                    function: f.id.clone(),
                    lhs: Estimate { value: lhs, stderr: std_dev(&ls) },
                    rhs: Estimate { value: rhs, stderr: std_dev(&rs) + pad },
                    slack: Estimate { value: rhs - lhs, stderr: std_dev(&ss) + pad },
                    clipped: self.clipped,
                }
            })
            .collect()
    }
}

/// Bootstrap plans for the interior and boundary blocks of one check.
#[derive(Debug, Clone)]
pub struct Plans {
    pub interior: Vec<Vec<usize>>,
    pub boundary: Vec<Vec<usize>>,
}

impl Plans {
    pub fn new(interior_blocks: usize, boundary_blocks: usize, seed: u64, label: &str) -> Self {
        Self {
            interior: bootstrap_plan(interior_blocks, BOOTSTRAP_RESAMPLES, seed, &format!("{label}/bootstrap")),
            boundary: bootstrap_plan(boundary_blocks.max(1), BOOTSTRAP_RESAMPLES, seed, &format!("{label}/bootstrap-boundary")),
        }
    }
}

// ---------------------------------------------------------------------------
// Rayleigh-quotient lower bound for the Poincare constant

/// Centred monomials of degree 1 and 2 and their gradients.
fn probe_basis(y: &Vector) -> (Vector, Matrix) {
    let d = y.len();
    let m = d + d * (d + 1) / 2;
    let mut phi = Vector::zeros(m);
    let mut jac = Matrix::zeros(m, d);
    for i in 0..d {
        phi[i] = y[i];
        jac[(i, i)] = 1.0;
    }
    let mut k = d;
    for i in 0..d {
        for j in i..d {
            phi[k] = y[i] * y[j];
            jac[(k, i)] += y[j];
            jac[(k, j)] += y[i];
            k += 1;
        }
    }
    (phi, jac)
}

/// Block sums of `phi`, `phi phi^T`, and `J J^T` for the probe basis.
#[derive(Debug, Clone)]
pub struct ProbeSums {
    counts: Vec<f64>,
    mean: Vec<Vector>,
    second: Vec<Matrix>,
    energy: Vec<Matrix>,
}

impl ProbeSums {
    pub fn collect(samples: &SampleSet, center: &Vector) -> Self {
        let parts: Vec<(f64, Vector, Matrix, Matrix)> = samples
            .blocks
            .par_iter()
            .map(|range| {
                let d = center.len();
                let m = d + d * (d + 1) / 2;
                let mut s1 = Vector::zeros(m);
                let mut s2 = Matrix::zeros(m, m);
                let mut e = Matrix::zeros(m, m);
                for x in &samples.points[range.clone()] {
                    let (phi, jac) = probe_basis(&(x - center));
                    s1 += &phi;
                    s2.ger(1.0, &phi, &phi, 1.0);
                    e.gemm(1.0, &jac, &jac.transpose(), 1.0);
                }
                (range.len() as f64, s1, s2, e)
            })
            .collect();
        let mut out = Self { counts: vec![], mean: vec![], second: vec![], energy: vec![] };
        for (c, a, b, e) in parts {
            out.counts.push(c);
            out.mean.push(a);
            out.second.push(b);
            out.energy.push(e);
        }
        out
    }

    pub fn blocks(&self) -> usize {
        self.counts.len()
    }

    /// `max_v Var(v . phi) / E|grad v . phi|^2` over the listed blocks.
    pub fn lower_bound(&self, blocks: impl IntoIterator<Item = usize>) -> f64 {
        let m = self.mean[0].len();
        let mut n = 0.0;
        let mut s1 = Vector::zeros(m);
        let mut s2 = Matrix::zeros(m, m);
        let mut e = Matrix::zeros(m, m);
        for b in blocks {
            n += self.counts[b];
            s1 += &self.mean[b];
            s2 += &self.second[b];
            e += &self.energy[b];
        }
        let mean = s1 / n;
        let cov = symmetrize(&(s2 / n - &mean * mean.transpose()));
        let energy = symmetrize(&(e / n));
        generalized_max_eigenvalue(&cov, &energy)
    }
}

/// Largest `lambda` with `A v = lambda B v`, for `B` positive definite.
pub fn generalized_max_eigenvalue(a: &Matrix, b: &Matrix) -> f64 {
    match nalgebra::Cholesky::new(b.clone()) {
        Some(chol) => {
            let l = chol.l();
            let Some(linv) = l.clone().try_inverse() else { return f64::NAN };
            max_eigenvalue(&(&linv * a * linv.transpose()))
        }
        None => f64::NAN,
    }
}
