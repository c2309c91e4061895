//! One-dimensional transport: tabulated densities with accurate CDF and
//! quantile evaluation, monotone rearrangement, Monge-Ampere residuals,
//! numerical Legendre transforms, the entropic curvature criterion, and a
//! damped fixed point for the one-dimensional Kahler-Einstein equation.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fields::{FnProfile, Matrix, PotentialField, Profile1D, Vector};
use crate::linalg::spd_log_det;
use crate::quadrature::{integrate8, integrate_composite};
use crate::tolerances::{
    CDF_GRID_POINTS, HYPOTHESIS_SLACK, KE_BARYCENTER_TOLERANCE, KE_DAMPING, KE_MAX_ITERATIONS, KE_TOLERANCE,
    TAIL_QUANTILE,
};

// ---------------------------------------------------------------------------
// Densities

/// Probability density `exp(-V - log Z)` on an interval, with a CDF table.
///
/// Infinite sides are first bracketed by scanning outward until `V` has
/// risen by 80 above its running minimum, then truncated at the
/// `TAIL_QUANTILE` quantile and re-tabulated on `CDF_GRID_POINTS` equal
/// cells, each integrated with an 8-point Gauss rule.
#[derive(Clone)]
pub struct Density1D {
    potential: Arc<dyn Profile1D>,
    support: (f64, f64),
    edges: Vec<f64>,
    cum: Vec<f64>,
    tail: Vec<f64>,
    log_z: f64,
    gap: bool,
}

impl std::fmt::Debug for Density1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Density1D")
            .field("support", &self.support)
            .field("range", &self.range())
            .field("log_z", &self.log_z)
            .finish()
    }
}

struct Table {
    masses: Vec<f64>,
    vref: f64,
}

fn tabulate(potential: &dyn Profile1D, a: f64, b: f64, cells: usize) -> Result<Table> {
    let (nodes, weights) = crate::quadrature::gl8();
    let h = (b - a) / cells as f64;
    let mut values = Vec::with_capacity(cells * nodes.len());
    let mut vref = f64::INFINITY;
    for i in 0..cells {
        let mid = a + (i as f64 + 0.5) * h;
        for t in nodes {
            let v = potential.value(mid + 0.5 * h * t);
            if v < vref {
                vref = v;
            }
            values.push(v);
        }
    }
    if !vref.is_finite() {
        return Err(Error::NonNormalizable(format!("potential is nowhere finite on [{a}, {b}]")));
    }
    let k = nodes.len();
    let masses = (0..cells)
        .map(|i| {
            0.5 * h
                * weights
                    .iter()
                    .zip(&values[i * k..(i + 1) * k])
                    .map(|(w, v)| if v.is_nan() { 0.0 } else { w * (vref - v).exp() })
                    .sum::<f64>()
        })
        .collect();
    Ok(Table { masses, vref })
}

fn scan_outward(potential: &dyn Profile1D, start: f64, dir: f64) -> Result<f64> {
    let mut vmin = f64::INFINITY;
    let mut prev = f64::NAN;
    for k in -10..64 {
        let x = start + dir * 2f64.powi(k);
        let v = potential.value(x);
        if v.is_finite() {
            vmin = vmin.min(v);
            if k >= 0 && v - vmin > 80.0 && v > prev {
                return Ok(x);
            }
        }
        prev = v;
    }
    Err(Error::NonNormalizable("potential does not grow at infinity".into()))
}

impl Density1D {
    /// Normalized density `exp(-V)` on `(lower, upper)`; either end may be infinite.
    pub fn new(potential: Arc<dyn Profile1D>, lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::InvalidParameter { name: "support".into(), reason: format!("[{lower}, {upper}] is empty") });
        }
        let n = CDF_GRID_POINTS;
        let (mut a, mut b) = (lower, upper);
        if !a.is_finite() || !b.is_finite() {
            let start = if a.is_finite() {
                a
            } else if b.is_finite() {
                b
            } else {
                0.0
            };
            if !a.is_finite() {
                a = scan_outward(potential.as_ref(), start, -1.0)?;
            }
            if !b.is_finite() {
                b = scan_outward(potential.as_ref(), start, 1.0)?;
            }
            let first = Self::from_table(potential.clone(), (lower, upper), a, b, n)?;
            if !lower.is_finite() {
                let i = first.cum.partition_point(|c| *c <= TAIL_QUANTILE).saturating_sub(1);
                a = first.edges[i];
            }
            if !upper.is_finite() {
                let j = first.tail.partition_point(|t| *t > TAIL_QUANTILE).min(n);
                b = first.edges[j];
            }
        }
        Self::from_table(potential, (lower, upper), a, b, n)
    }

    fn from_table(potential: Arc<dyn Profile1D>, support: (f64, f64), a: f64, b: f64, n: usize) -> Result<Self> {
        let table = tabulate(potential.as_ref(), a, b, n)?;
        let total: f64 = table.masses.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NonNormalizable(format!("total mass {total}")));
        }
        let h = (b - a) / n as f64;
        let edges: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + i as f64 * h }).collect();
        let mut cum = vec![0.0; n + 1];
        for i in 0..n {
            cum[i + 1] = cum[i] + table.masses[i] / total;
        }
        let mut tail = vec![0.0; n + 1];
        for i in (0..n).rev() {
            tail[i] = tail[i + 1] + table.masses[i] / total;
        }
        let first = table.masses.iter().position(|m| *m > 0.0).unwrap_or(0);
        let last = table.masses.iter().rposition(|m| *m > 0.0).unwrap_or(0);
        let gap = table.masses[first..=last].contains(&0.0);
        Ok(Self { potential, support, edges, cum, tail, log_z: total.ln() - table.vref, gap })
    }

    pub fn from_profile(profile: impl Profile1D + 'static, lower: f64, upper: f64) -> Result<Self> {
        Self::new(Arc::new(profile), lower, upper)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::from_profile(crate::fields::ZeroProfile, a, b)
    }

    pub fn gaussian(mean: f64, sigma: f64) -> Result<Self> {
        Self::from_profile(crate::fields::QuadraticProfile { sigma, center: mean }, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `rate exp(-rate x)` on `[0, inf)`.
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::from_profile(crate::fields::LinearProfile { slope: rate, offset: 0.0 }, 0.0, f64::INFINITY)
    }

    /// Law of `X + by`.
    pub fn shifted(&self, by: f64) -> Result<Self> {
        let inner = self.potential.clone();
        let prof = FnProfile(Arc::new(move |t| inner.derivatives(t - by)));
        Self::new(Arc::new(prof), self.support.0 + by, self.support.1 + by)
    }

    pub fn profile(&self) -> &Arc<dyn Profile1D> {
        &self.potential
    }

    /// Declared support.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Tabulated range after tail truncation.
    pub fn range(&self) -> (f64, f64) {
        (self.edges[0], self.edges[self.edges.len() - 1])
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    /// Whether the density vanishes on an interval inside its support.
    pub fn has_gap(&self) -> bool {
        self.gap
    }

    fn inside(&self, x: f64) -> bool {
        x > self.support.0 && x < self.support.1
    }

    /// Normalized potential `V + log Z`.
    pub fn normalized_potential(&self, x: f64) -> f64 {
        self.potential.value(x) + self.log_z
    }

    pub fn log_density(&self, x: f64) -> f64 {
        if !self.inside(x) {
            return f64::NEG_INFINITY;
        }
        -self.normalized_potential(x)
    }

    pub fn density(&self, x: f64) -> f64 {
        let l = self.log_density(x);
        if l.is_nan() {
            0.0
        } else {
            l.exp()
        }
    }

    fn cell(&self, x: f64) -> usize {
        let (a, b) = self.range();
        let n = self.edges.len() - 1;
        (((x - a) / (b - a) * n as f64).floor().max(0.0) as usize).min(n - 1)
    }

    fn partial(&self, l: f64, r: f64) -> f64 {
        integrate8(l, r, |t| self.density(t))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = self.range();
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        let i = self.cell(x);
        if self.cum[i] > 0.5 {
            return 1.0 - self.survival(x);
        }
        (self.cum[i] + self.partial(self.edges[i], x)).min(1.0)
    }

    /// `1 - cdf(x)`, accurate in the upper tail.
    pub fn survival(&self, x: f64) -> f64 {
        let (a, b) = self.range();
        if x <= a {
            return 1.0;
        }
        if x >= b {
            return 0.0;
        }
        let i = self.cell(x);
        (self.tail[i + 1] + self.partial(x, self.edges[i + 1])).min(1.0)
    }

    /// Solves `mass(x) = target` on `[l, r]` where `mass` is monotone with
    /// derivative `sign * density`.
    fn solve_in_cell(&self, l: f64, r: f64, target: f64, mass: impl Fn(f64) -> f64, sign: f64) -> f64 {
        let (mut lo, mut hi) = (l, r);
        let total = mass(if sign > 0.0 { r } else { l });
        let frac = if total > 0.0 { (target / total).clamp(0.0, 1.0) } else { 0.5 };
        let mut x = if sign > 0.0 { l + frac * (r - l) } else { r - frac * (r - l) };
        for _ in 0..200 {
            let g = mass(x) - target;
            // mass increases with x when sign > 0
            if (g > 0.0) == (sign > 0.0) {
                hi = x;
            } else {
                lo = x;
            }
            if g == 0.0 || hi - lo <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
                break;
            }
            let dens = self.density(x);
            let next = if dens > 0.0 { x - g / (sign * dens) } else { f64::NAN };
            x = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        x
    }

    /// Quantile with `cdf(q) = u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let (a, b) = self.range();
        if u <= 0.0 {
            return a;
        }
        if u >= 1.0 {
            return b;
        }
        if u > 0.5 {
            return self.quantile_upper(1.0 - u);
        }
        let n = self.edges.len() - 1;
        let i = self.cum.partition_point(|c| *c <= u).saturating_sub(1).min(n - 1);
        let (l, r) = (self.edges[i], self.edges[i + 1]);
        self.solve_in_cell(l, r, u - self.cum[i], |x| self.partial(l, x), 1.0)
    }

    /// Point with `survival(q) = s`; accurate for tiny `s`.
    pub fn quantile_upper(&self, s: f64) -> f64 {
        let (a, b) = self.range();
        if s <= 0.0 {
            return b;
        }
        if s >= 1.0 {
            return a;
        }
        let n = self.edges.len() - 1;
        // tail is non-increasing; find the cell with tail[i+1] <= s < tail[i]
        let i = self.tail.partition_point(|t| *t > s).saturating_sub(1).min(n - 1);
        let (l, r) = (self.edges[i], self.edges[i + 1]);
        self.solve_in_cell(l, r, s - self.tail[i + 1], |x| self.partial(x, r), -1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if u < 0.5 {
            self.quantile(u)
        } else {
            self.quantile_upper(1.0 - u)
        }
    }

    /// `E f(X)` by per-cell Gauss quadrature.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.edges.windows(2).map(|w| integrate8(w[0], w[1], |t| self.density(t) * f(t))).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|t| t)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expectation(|t| (t - m) * (t - m))
    }
}

/// `Density1D` as the normalized potential `V + log Z` on the line.
impl PotentialField for Density1D {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &Vector) -> f64 {
        self.normalized_potential(x[0])
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_element(1, self.potential.derivatives(x[0])[1])
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        Matrix::from_element(1, 1, self.potential.derivatives(x[0])[2])
    }
    fn third(&self, x: &Vector) -> Option<Vec<Matrix>> {
        Some(vec![Matrix::from_element(1, 1, self.potential.derivatives(x[0])[3])])
    }
    fn fourth(&self, x: &Vector) -> Option<Vec<Matrix>> {
        Some(vec![Matrix::from_element(1, 1, self.potential.derivatives(x[0])[4])])
    }
}

// ---------------------------------------------------------------------------
// Monotone transport

/// `T = G^-1(F_mu(x))` and `T' = mu(x) / nu(T(x))`.
pub fn monotone_map_1d(mu: &Density1D, nu: &Density1D, x: f64) -> Result<(f64, f64)> {
    if nu.has_gap() {
        return Err(Error::CdfInversionFailure { level: mu.cdf(x), reason: "target density vanishes inside its support".into() });
    }
    if !mu.inside(x) {
        return Err(Error::InvalidParameter { name: "x".into(), reason: format!("{x} outside the source support") });
    }
    let u = mu.cdf(x);
    let t = if u <= 0.5 { nu.quantile(u) } else { nu.quantile_upper(mu.survival(x)) };
    if !t.is_finite() {
        return Err(Error::CdfInversionFailure { level: u, reason: "non-finite quantile".into() });
    }
    let m = mu.density(x);
    let n = nu.density(t);
    let dt = if m == 0.0 || !(n > 0.0) { 0.0 } else { m / n };
    Ok((t, dt))
}

/// Brenier potential of the monotone map, anchored at zero at `anchor`.
#[derive(Clone, Debug)]
pub struct TransportPotential1D {
    pub mu: Density1D,
    pub nu: Density1D,
    pub anchor: f64,
}

impl TransportPotential1D {
    fn map(&self, x: f64) -> (f64, f64) {
        monotone_map_1d(&self.mu, &self.nu, x).unwrap_or((f64::NAN, f64::NAN))
    }
}

impl PotentialField for TransportPotential1D {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &Vector) -> f64 {
        integrate_composite(self.anchor, x[0], 16, |t| self.map(t).0)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_element(1, self.map(x[0]).0)
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        Matrix::from_element(1, 1, self.map(x[0]).1)
    }
}

/// `W(grad Phi) - V - log det D^2 Phi`; zero exactly when `grad Phi`
/// pushes `exp(-V)` forward to `exp(-W)`.
pub fn monge_ampere_residual(phi: &dyn PotentialField, v: &dyn PotentialField, w: &dyn PotentialField, x: &Vector) -> Result<f64> {
    let a = phi.hessian(x);
    let log_det = spd_log_det(&a).ok_or_else(|| Error::DegenerateHessian { point: x.iter().copied().collect() })?;
    Ok(w.value(&phi.gradient(x)) - v.value(x) - log_det)
}

// ---------------------------------------------------------------------------
// Legendre transform

/// Numerical convex conjugate `V*(y) = sup_x (xy - V(x))` over a grid,
/// with Newton refinement of the maximizer.
#[derive(Clone)]
pub struct Conjugate1D {
    potential: Arc<dyn Profile1D>,
    xs: Vec<f64>,
    slopes: Vec<f64>,
}

impl Conjugate1D {
    pub fn new(potential: Arc<dyn Profile1D>, xs: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter { name: "grid".into(), reason: "needs at least two increasing points".into() });
        }
        let mut slopes = Vec::with_capacity(xs.len());
        for &x in &xs {
            let [_, d1, d2, _, _] = potential.derivatives(x);
            if !(d2 > 0.0) {
                return Err(Error::NotStronglyConvex { x, second: d2 });
            }
            slopes.push(d1);
        }
        if slopes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::NotStronglyConvex { x: f64::NAN, second: 0.0 });
        }
        Ok(Self { potential, xs, slopes })
    }

    /// The maximizer `x(y) = (V')^-1(y)`, clamped to the grid.
    pub fn maximizer(&self, y: f64) -> f64 {
        let n = self.xs.len();
        if y <= self.slopes[0] {
            return self.xs[0];
        }
        if y >= self.slopes[n - 1] {
            return self.xs[n - 1];
        }
        let i = self.slopes.partition_point(|s| *s < y);
        let (mut lo, mut hi) = (self.xs[i - 1], self.xs[i]);
        let span = self.slopes[i] - self.slopes[i - 1];
        let mut x = lo + (hi - lo) * (y - self.slopes[i - 1]) / span;
        for _ in 0..100 {
            let [_, d1, d2, _, _] = self.potential.derivatives(x);
            let g = d1 - y;
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if g == 0.0 || hi - lo <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
                break;
            }
            let next = x - g / d2;
            if next > lo && next < hi {
                let step = (next - x).abs();
                x = next;
                if step <= f64::EPSILON * (1.0 + x.abs()) {
                    break;
                }
            } else {
                x = 0.5 * (lo + hi);
            }
        }
        x
    }
}

impl Profile1D for Conjugate1D {
    fn derivatives(&self, y: f64) -> [f64; 5] {
        let x = self.maximizer(y);
        let [v, _, d2, d3, d4] = self.potential.derivatives(x);
        let n = self.xs.len();
        let interior = y > self.slopes[0] && y < self.slopes[n - 1];
        if !interior {
            return [x * y - v, x, 0.0, 0.0, 0.0];
        }
        let i2 = 1.0 / d2;
        [x * y - v, x, i2, -d3 * i2.powi(3), (-d4 + 3.0 * d3 * d3 * i2) * i2.powi(4)]
    }
}

/// Conjugate data on a dual grid: `V*`, its derivatives, and
/// `F(y) = y V*'(y) - log V*''(y)`.
#[derive(Debug, Clone)]
pub struct LegendreData {
    pub ys: Vec<f64>,
    pub vstar: Vec<f64>,
    pub dvstar: Vec<f64>,
    pub d2vstar: Vec<f64>,
    pub f: Vec<f64>,
}

impl LegendreData {
    /// Tabulates a known conjugate on `ys`.
    pub fn from_dual(dual: &dyn Profile1D, ys: &[f64]) -> Result<Self> {
        let mut out = Self { ys: ys.to_vec(), vstar: vec![], dvstar: vec![], d2vstar: vec![], f: vec![] };
        for &y in ys {
            let [v, d1, d2, _, _] = dual.derivatives(y);
            if !(d2 > 0.0) {
                return Err(Error::NotStronglyConvex { x: y, second: d2 });
            }
            out.vstar.push(v);
            out.dvstar.push(d1);
            out.d2vstar.push(d2);
            out.f.push(y * d1 - d2.ln());
        }
        Ok(out)
    }
}

/// Conjugate of `v` computed over the primal grid `xs`, tabulated on `ys`.
pub fn legendre_1d(v: Arc<dyn Profile1D>, xs: Vec<f64>, ys: &[f64]) -> Result<(Conjugate1D, LegendreData)> {
    let conj = Conjugate1D::new(v, xs)?;
    let data = LegendreData::from_dual(&conj, ys)?;
    Ok((conj, data))
}

/// Verdict of the entropic curvature criterion on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropicReport {
    pub convex: bool,
    /// Smallest margin `F'' + (log V*'')'^2/2 - 2 rho V*''` over the grid.
    pub worst_violation: f64,
    pub worst_at: f64,
}

/// Checks `F'' + (1/2)((log V*'')')^2 >= 2 rho V*''` at interior grid
/// points using three-point differences on a possibly non-uniform grid.
pub fn entropic_condition_check(data: &LegendreData, rho: f64) -> EntropicReport {
    let ys = &data.ys;
    let mut worst = f64::INFINITY;
    let mut worst_at = f64::NAN;
    let mut convex = true;
    for i in 1..ys.len().saturating_sub(1) {
        let hm = ys[i] - ys[i - 1];
        let hp = ys[i + 1] - ys[i];
        let f2 = 2.0 * ((data.f[i + 1] - data.f[i]) / hp - (data.f[i] - data.f[i - 1]) / hm) / (hp + hm);
        let dlog = (data.d2vstar[i + 1].ln() - data.d2vstar[i - 1].ln()) / (hp + hm);
        let target = 2.0 * rho * data.d2vstar[i];
        let margin = f2 + 0.5 * dlog * dlog - target;
        if margin < worst {
            worst = margin;
            worst_at = ys[i];
        }
        if margin < -HYPOTHESIS_SLACK * (1.0 + f2.abs() + target.abs()) {
            convex = false;
        }
    }
    EntropicReport { convex, worst_violation: worst, worst_at }
}

/// Largest `rho` in `[0, upper]` passing [`entropic_condition_check`], by bisection.
pub fn max_entropic_rho(data: &LegendreData, upper: f64) -> f64 {
    if !entropic_condition_check(data, 0.0).convex {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, upper);
    if entropic_condition_check(data, hi).convex {
        return hi;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if entropic_condition_check(data, mid).convex {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Even conjugate with `V*'' = min{1/p, |y|^{p-2}/p}`, `p = q/(q-1)`, `q > 2`.
#[derive(Debug, Clone, Copy)]
pub struct CappedPowerDual {
    pub q: f64,
}

impl CappedPowerDual {
    pub fn p(&self) -> f64 {
        self.q / (self.q - 1.0)
    }
}

impl Profile1D for CappedPowerDual {
    fn derivatives(&self, y: f64) -> [f64; 5] {
        let p = self.p();
        let s = if y < 0.0 { -1.0 } else { 1.0 };
        let t = y.abs();
        if t <= 1.0 {
            return [t * t / (2.0 * p), y / p, 1.0 / p, 0.0, 0.0];
        }
        let v = 1.0 / (2.0 * p) + (t - 1.0) / p + (t.powf(p) - 1.0 - p * (t - 1.0)) / (p * p * (p - 1.0));
        let d1 = 1.0 / p + (t.powf(p - 1.0) - 1.0) / (p * (p - 1.0));
        let d2 = t.powf(p - 2.0) / p;
        let d3 = (p - 2.0) * t.powf(p - 3.0) / p;
        let d4 = (p - 2.0) * (p - 3.0) * t.powf(p - 4.0) / p;
        [v, s * d1, d2, s * d3, d4]
    }
}

/// The primal potential whose conjugate is [`CappedPowerDual`]: `p x^2/2`
/// for `|x| <= 1/p`, growing like `|x|^q` beyond.
#[derive(Debug, Clone, Copy)]
pub struct CappedPowerPotential {
    pub q: f64,
}

impl Profile1D for CappedPowerPotential {
    fn derivatives(&self, x: f64) -> [f64; 5] {
        let dual = CappedPowerDual { q: self.q };
        let p = dual.p();
        let s = if x < 0.0 { -1.0 } else { 1.0 };
        let t = x.abs();
        if t <= 1.0 / p {
            return [p * t * t / 2.0, p * x, p, 0.0, 0.0];
        }
        let y = (1.0 + p * (p - 1.0) * (t - 1.0 / p)).powf(1.0 / (p - 1.0));
        let v = t * y - dual.derivatives(y)[0];
        let d2 = p * y.powf(2.0 - p);
        let d3 = p * p * (2.0 - p) * y.powf(3.0 - 2.0 * p);
        let d4 = p.powi(3) * (2.0 - p) * (3.0 - 2.0 * p) * y.powf(4.0 - 3.0 * p);
        [v, s * y, d2, s * d3, d4]
    }
}

// ---------------------------------------------------------------------------
// Kahler-Einstein fixed point

/// Solver controls for [`ke_solve_1d`].
#[derive(Debug, Clone, Copy)]
pub struct KeOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub damping: f64,
    /// Shift the target to barycenter zero before solving.
    pub recenter: bool,
    /// Translation of the initial guess.
    pub initial_shift: f64,
    pub grid_cells: usize,
}

impl Default for KeOptions {
    fn default() -> Self {
        Self {
            tol: KE_TOLERANCE,
            max_iterations: KE_MAX_ITERATIONS,
            damping: KE_DAMPING,
            recenter: true,
            initial_shift: 0.0,
            grid_cells: 16384,
        }
    }
}

/// Solution `Phi` of `exp(-Phi) = Phi'' exp(-W(Phi'))` on a uniform grid,
/// stored as `Phi`, `Phi'`, `Phi''` at the nodes and evaluated between
/// nodes by cubic Hermite interpolation of `Phi'`.
#[derive(Debug, Clone)]
pub struct KeSolution {
    pub origin: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub curvatures: Vec<f64>,
    /// Cumulative mass of `exp(-Phi)` at the nodes.
    pub cdf: Vec<f64>,
    pub iterations: usize,
    /// Final `max(sup |T - Phi'|, sup |log T' - log Phi''|)`, the latter
    /// over the central `1 - 2e-6` of the mass.
    pub residual: f64,
    /// Target after recentring.
    pub target: Density1D,
    /// Amount the target was shifted by.
    pub target_shift: f64,
}

impl KeSolution {
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.slopes.len()).map(|i| self.origin + i as f64 * self.step)
    }

    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let u = (x - self.origin) / self.step;
        let n = self.slopes.len() - 1;
        if !(u >= 0.0 && u <= n as f64) {
            return None;
        }
        let i = (u.floor() as usize).min(n - 1);
        Some((i, u - i as f64))
    }

    /// `(Phi, Phi', Phi'')` at `x`; linear continuation outside the grid.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let h = self.step;
        let Some((i, t)) = self.locate(x) else {
            let (j, x0) = if x < self.origin {
                (0, self.origin)
            } else {
                let n = self.slopes.len() - 1;
                (n, self.origin + n as f64 * h)
            };
            return (self.values[j] + self.slopes[j] * (x - x0), self.slopes[j], 0.0);
        };
        let (s0, s1) = (self.slopes[i], self.slopes[i + 1]);
        let (m0, m1) = (self.curvatures[i] * h, self.curvatures[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let slope = h00 * s0 + h10 * m0 + h01 * s1 + h11 * m1;
        let curv = ((6.0 * t2 - 6.0 * t) * s0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * s1 + (3.0 * t2 - 2.0 * t) * m1) / h;
        // integral of the Hermite cubic from 0 to t
        let t4 = t2 * t2;
        let i00 = t4 / 2.0 - t3 + t;
        let i10 = t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0;
        let i01 = -t4 / 2.0 + t3;
        let i11 = t4 / 4.0 - t3 / 3.0;
        let value = self.values[i] + h * (i00 * s0 + i10 * m0 + i01 * s1 + i11 * m1);
        (value, slope, curv)
    }

    /// `-Phi - log Phi'' + W(Phi')` at the nodes where `exp(-Phi)` has
    /// cumulative mass in `[cut, 1 - cut]`; returns the sup of its modulus.
    pub fn equation_residual(&self, cut: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &c) in self.cdf.iter().enumerate() {
            if c < cut || c > 1.0 - cut {
                continue;
            }
            let r = -self.values[i] - self.curvatures[i].ln() + self.target.normalized_potential(self.slopes[i]);
            worst = worst.max(r.abs());
        }
        worst
    }

    /// Largest `Phi''` over the nodes.
    pub fn max_curvature(&self) -> f64 {
        self.curvatures.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl PotentialField for KeSolution {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &Vector) -> f64 {
        self.eval(x[0]).0
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_element(1, self.eval(x[0]).1)
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        Matrix::from_element(1, 1, self.eval(x[0]).2)
    }
}

/// Cumulative integrals from the left of a function given with its
/// derivative at uniform nodes (trapezoid with endpoint correction).
fn hermite_cumulative(f: &[f64], df: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for i in 0..f.len() - 1 {
        out[i + 1] = out[i] + 0.5 * h * (f[i] + f[i + 1]) + h * h * (df[i] - df[i + 1]) / 12.0;
    }
    out
}

/// Damped fixed point `Phi'_{k+1} = (1-a) Phi'_k + a T_k`, where `T_k` is
/// the monotone map from `exp(-Phi_k)` (normalized) to the target; the
/// iterate is recentred to barycenter zero every step by translating the grid.
pub fn ke_solve_1d(nu: &Density1D, opts: &KeOptions) -> Result<KeSolution> {
    let (a0, b0) = nu.support();
    if !a0.is_finite() || !b0.is_finite() {
        return Err(Error::NonCompactTarget);
    }
    let bary = nu.mean();
    let (target, shift) = if opts.recenter {
        if bary.abs() > KE_BARYCENTER_TOLERANCE {
            (nu.shifted(-bary)?, -bary)
        } else {
            (nu.clone(), 0.0)
        }
    } else {
        if bary.abs() > KE_BARYCENTER_TOLERANCE {
            return Err(Error::BarycenterNotZero { barycenter: bary });
        }
        (nu.clone(), 0.0)
    };
    if target.has_gap() {
        return Err(Error::CdfInversionFailure { level: f64::NAN, reason: "target density vanishes inside its support".into() });
    }
    let (a, b) = target.support();
    let radius = a.abs().max(b.abs());
    let inner = a.abs().min(b.abs());
    if !(inner > 0.0) {
        return Err(Error::BarycenterNotZero { barycenter: bary });
    }
    let n = opts.grid_cells;
    let half = 64.0 / inner;
    let h = 2.0 * half / n as f64;
    let mut origin = -half;
    let mut s: Vec<f64> = (0..=n)
        .map(|i| radius * ((origin + i as f64 * h - opts.initial_shift) / radius).tanh())
        .collect();
    let mut ds: Vec<f64> = (0..=n)
        .map(|i| {
            let c = ((origin + i as f64 * h - opts.initial_shift) / radius).cosh();
            1.0 / (c * c)
        })
        .collect();
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iterations {
        let phi = hermite_cumulative(&s, &ds, h);
        let pmin = phi.iter().copied().fold(f64::INFINITY, f64::min);
        let m: Vec<f64> = phi.iter().map(|p| (pmin - p).exp()).collect();
        let dm: Vec<f64> = m.iter().zip(&s).map(|(m, s)| -m * s).collect();
        let cum = hermite_cumulative(&m, &dm, h);
        let z = cum[n];
        let mut tail = vec![0.0; n + 1];
        for i in (0..n).rev() {
            tail[i] = tail[i + 1] + (cum[i + 1] - cum[i]);
        }
        let log_z = z.ln() - pmin;
        // barycenter of the current measure
        let xm: Vec<f64> = (0..=n).map(|i| (origin + i as f64 * h) * m[i]).collect();
        let dxm: Vec<f64> = (0..=n).map(|i| m[i] + (origin + i as f64 * h) * dm[i]).collect();
        let bary_mu = hermite_cumulative(&xm, &dxm, h)[n] / z;
        let mut t = vec![0.0; n + 1];
        let mut dt = vec![0.0; n + 1];
        residual = 0.0;
        for i in 0..=n {
            let u = cum[i] / z;
            let ti = if u <= 0.5 { target.quantile(u) } else { target.quantile_upper(tail[i] / z) };
            let dens = target.density(ti);
            let mi = m[i] / z;
            t[i] = ti;
            dt[i] = if mi == 0.0 || !(dens > 0.0) { 0.0 } else { mi / dens };
            residual = residual.max((ti - s[i]).abs());
            if (1e-6..=1.0 - 1e-6).contains(&u) {
                residual = residual.max((dt[i].ln() - ds[i].ln()).abs());
            }
        }
        if residual < opts.tol {
            let values: Vec<f64> = phi.iter().map(|p| p + log_z).collect();
            let cdf: Vec<f64> = cum.iter().map(|c| c / z).collect();
            return Ok(KeSolution {
                origin,
                step: h,
                values,
                slopes: s,
                curvatures: ds,
                cdf,
                iterations: iter,
                residual,
                target,
                target_shift: shift,
            });
        }
        let lam = opts.damping;
        for i in 0..=n {
            s[i] = (1.0 - lam) * s[i] + lam * t[i];
            ds[i] = (1.0 - lam) * ds[i] + lam * dt[i];
        }
        origin -= bary_mu;
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, residual })
}
