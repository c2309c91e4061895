//! Test functions with closed-form gradients, and the default suite.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::convex_geometry::ConvexBody;
use crate::error::{Error, Result};
use crate::fields::Vector;
use crate::rng::stream;

type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// A `C^1` function with its gradient.
#[derive(Clone)]
pub struct TestFunction {
    pub id: String,
    eval: ScalarFn,
    grad: GradFn,
    pub lipschitz_bound: Option<f64>,
    pub vanishes_on_boundary: bool,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("vanishes_on_boundary", &self.vanishes_on_boundary)
            .finish()
    }
}

impl TestFunction {
    pub fn new(
        id: impl Into<String>,
        eval: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.into(), eval: Arc::new(eval), grad: Arc::new(grad), lipschitz_bound: None, vanishes_on_boundary: false }
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        (self.eval)(x)
    }

    pub fn grad(&self, x: &Vector) -> Vector {
        (self.grad)(x)
    }

    /// `f / scale`, renamed.
    pub fn scaled(&self, scale: f64, id: impl Into<String>) -> Self {
        let (e, g) = (self.eval.clone(), self.grad.clone());
        Self {
            id: id.into(),
            eval: Arc::new(move |x| e(x) / scale),
            grad: Arc::new(move |x| g(x) / scale),
            lipschitz_bound: self.lipschitz_bound.map(|l| l / scale),
            vanishes_on_boundary: self.vanishes_on_boundary,
        }
    }

    /// `f * b` for a bubble `b` vanishing on the boundary.
    pub fn times_bubble(&self, bubble: &Bubble) -> Self {
        let (e, e2, g) = (self.eval.clone(), self.eval.clone(), self.grad.clone());
        let (b1, b2) = (bubble.clone(), bubble.clone());
        Self {
            id: format!("bubble_{}", self.id),
            eval: Arc::new(move |x| e(x) * b1.value(x)),
            grad: Arc::new(move |x| g(x) * b2.value(x) + b2.gradient(x) * e2(x)),
            lipschitz_bound: None,
            vanishes_on_boundary: true,
        }
    }

    /// Largest discrepancy between the gradient and a central difference of
    /// the value, relative to `1 + |grad|`, over `points`.
    pub fn gradient_error(&self, points: &[Vector]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in points {
            let g = self.grad(x);
            let h = 1e-5 * (1.0 + x.amax());
            for k in 0..x.len() {
                let mut a = x.clone();
                let mut b = x.clone();
                a[k] += h;
                b[k] -= h;
                let fd = (self.eval(&a) - self.eval(&b)) / (2.0 * h);
                worst = worst.max((fd - g[k]).abs() / (1.0 + g.norm()));
            }
        }
        worst
    }

    /// Fails when [`Self::gradient_error`] exceeds `tol`.
    pub fn self_test(&self, points: &[Vector], tol: f64) -> Result<()> {
        let err = self.gradient_error(points);
        if err <= tol {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name: self.id.clone(), reason: format!("gradient mismatch {err:e}") })
        }
    }
}

/// A smooth function positive inside a body and zero on its boundary.
#[derive(Debug, Clone)]
pub enum Bubble {
    /// `1 - |x|^2 / r^2`.
    Ball { radius: f64 },
    /// `1 - (x/a)^2 - (y/b)^2`.
    Ellipse { a: f64, b: f64 },
    /// `1 - p(x)^2` with `p` the gauge.
    Gauge(ConvexBody),
}

impl Bubble {
    pub fn for_body(body: &ConvexBody) -> Self {
        match body {
            ConvexBody::Ball { radius, .. } => Bubble::Ball { radius: *radius },
            ConvexBody::Ellipse { a, b } => Bubble::Ellipse { a: *a, b: *b },
            other => Bubble::Gauge(other.clone()),
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            Bubble::Ball { radius } => 1.0 - x.norm_squared() / (radius * radius),
            Bubble::Ellipse { a, b } => 1.0 - (x[0] / a).powi(2) - (x[1] / b).powi(2),
            Bubble::Gauge(body) => 1.0 - body.gauge(x).powi(2),
        }
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        match self {
            Bubble::Ball { radius } => x * (-2.0 / (radius * radius)),
            Bubble::Ellipse { a, b } => Vector::from_vec(vec![-2.0 * x[0] / (a * a), -2.0 * x[1] / (b * b)]),
            Bubble::Gauge(body) => match body.gauge_and_normal(x) {
                // grad p = p n / <x, n> by homogeneity
                Ok((p, n)) => &n * (-2.0 * p * p / x.dot(&n)),
                Err(_) => Vector::zeros(x.len()),
            },
        }
    }
}

/// Sum of monomials in the shifted variable `y = x - center`.
#[derive(Debug, Clone)]
pub struct Polynomial {
    pub center: Vector,
    /// `(coefficient, [(coordinate, power)])`.
    pub terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl Polynomial {
    pub fn eval(&self, x: &Vector) -> f64 {
        let y = x - &self.center;
        self.terms
            .iter()
            .map(|(c, mono)| c * mono.iter().map(|&(i, k)| y[i].powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn grad(&self, x: &Vector) -> Vector {
        let y = x - &self.center;
        let mut g = Vector::zeros(x.len());
        for (c, mono) in &self.terms {
            for (a, &(i, k)) in mono.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let mut term = c * k as f64 * y[i].powi(k as i32 - 1);
                for (b, &(j, l)) in mono.iter().enumerate() {
                    if a != b {
                        term *= y[j].powi(l as i32);
                    }
                }
                g[i] += term;
            }
        }
        g
    }

    pub fn into_function(self, id: impl Into<String>) -> TestFunction {
        let p = Arc::new(self);
        let q = p.clone();
        TestFunction::new(id, move |x| p.eval(x), move |x| q.grad(x))
    }
}

/// Which variants of the suite an inequality needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionClass {
    Standard,
    /// Normalized so that `sup |grad f| <= 1` on the pilot sample (with 5% headroom).
    Lipschitz,
    /// Multiplied by a bubble of the body.
    Dirichlet,
}

/// Number of seeded random cubic polynomials in the suite.
pub const RANDOM_CUBICS: usize = 5;

/// Base suite in dimension `dim`: coordinates, sum, `|y|^2`, products,
/// cosines, and seeded sparse cubics, all in `y = x - center`.
pub fn base_suite(dim: usize, center: &Vector, seed: u64) -> Vec<TestFunction> {
    let mono = |terms: Vec<(f64, Vec<(usize, u32)>)>| Polynomial { center: center.clone(), terms };
    let mut out = Vec::new();
    for i in 0..dim {
        out.push(mono(vec![(1.0, vec![(i, 1)])]).into_function(format!("x{}", i + 1)));
    }
    if dim > 1 {
        out.push(mono((0..dim).map(|i| (1.0, vec![(i, 1)])).collect()).into_function("sum"));
    }
    out.push(mono((0..dim).map(|i| (1.0, vec![(i, 2)])).collect()).into_function("norm_sq"));
    if dim > 1 {
        out.push(mono(vec![(1.0, vec![(0, 1), (1, 1)])]).into_function("x1x2"));
    }
    if dim > 2 {
        out.push(mono(vec![(1.0, vec![(0, 1), (dim - 1, 1)])]).into_function(format!("x1x{dim}")));
    }
    for k in [1.0, 2.0] {
        let c = center[0];
        let id = if k == 1.0 { "cos_pi_x1".to_string() } else { "cos_2pi_x1".to_string() };
        out.push(TestFunction::new(
            id,
            move |x| (PI * k * (x[0] - c)).cos(),
            move |x| {
                let mut g = Vector::zeros(x.len());
                g[0] = -PI * k * (PI * k * (x[0] - c)).sin();
                g
            },
        ));
    }
    for r in 0..RANDOM_CUBICS {
        let mut rng = stream(seed, "suite/cubic", r as u64);
        out.push(mono(random_cubic_terms(dim, &mut rng)).into_function(format!("cubic_{r}")));
    }
    out
}

/// Three sparse monomials of total degree at most 3, the first of degree exactly 3.
fn random_cubic_terms<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<(f64, Vec<(usize, u32)>)> {
    let mut terms = Vec::new();
    for t in 0..3 {
        let degree = if t == 0 { 3 } else { rng.random_range(1..=3) };
        let mut powers = vec![0u32; dim];
        for _ in 0..degree {
            powers[rng.random_range(0..dim)] += 1;
        }
        let mono: Vec<(usize, u32)> = powers.iter().enumerate().filter(|(_, k)| **k > 0).map(|(i, k)| (i, *k)).collect();
        let c: f64 = StandardNormal.sample(rng);
        terms.push((c, mono));
    }
    terms
}

/// Lipschitz-normalized copy: divided by `1.05 max |grad f|` over `pilot`.
pub fn lipschitz_normalized(f: &TestFunction, pilot: &[Vector]) -> Option<TestFunction> {
    let m = pilot.iter().map(|x| f.grad(x).norm()).fold(0.0, f64::max);
    if !(m > 0.0) || !m.is_finite() {
        return None;
    }
    let mut g = f.scaled(1.05 * m, format!("{}_lip", f.id));
    g.lipschitz_bound = Some(1.0 / 1.05);
    Some(g)
}

/// Suite for `class`, recentred at `center` and normalized on `pilot`.
pub fn suite_for(class: FunctionClass, dim: usize, center: &Vector, pilot: &[Vector], body: Option<&ConvexBody>, seed: u64) -> Result<Vec<TestFunction>> {
    let base = base_suite(dim, center, seed);
    Ok(match class {
        FunctionClass::Standard => base,
        FunctionClass::Lipschitz => base.iter().filter_map(|f| lipschitz_normalized(f, pilot)).collect(),
        FunctionClass::Dirichlet => {
            let body = body.ok_or_else(|| Error::InvalidParameter { name: "body".into(), reason: "Dirichlet functions need a body".into() })?;
            let bubble = Bubble::for_body(body);
            base.iter().map(|f| f.times_bubble(&bubble)).collect()
        }
    })
}

/// Keeps the functions whose id is listed (all when `ids` is empty).
pub fn select(suite: Vec<TestFunction>, ids: &[String]) -> Result<Vec<TestFunction>> {
    if ids.is_empty() {
        return Ok(suite);
    }
    let mut out = Vec::new();
    for id in ids {
        let f = suite
            .iter()
            .find(|f| &f.id == id)
            .ok_or_else(|| Error::InvalidParameter { name: "functions".into(), reason: format!("no suite function '{id}'") })?;
        out.push(f.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn points(dim: usize, n: usize) -> Vec<Vector> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        (0..n).map(|_| Vector::from_fn(dim, |_, _| rng.random_range(-1.5..1.5))).collect()
    }

    #[test]
    fn suite_gradients_match_differences() {
        let center = Vector::from_vec(vec![0.2, -0.1, 0.4]);
        let pts = points(3, 30);
        for f in base_suite(3, &center, 11) {
            f.self_test(&pts, 1e-6).unwrap();
        }
        let body = ConvexBody::Ball { dim: 3, radius: 2.0 };
        for f in suite_for(FunctionClass::Dirichlet, 3, &center, &pts, Some(&body), 11).unwrap() {
            f.self_test(&pts, 1e-6).unwrap();
        }
        let simplex = ConvexBody::Simplex { dim: 3, scale: 1.0 };
        let pos: Vec<Vector> = pts.iter().map(|x| x.abs() * 0.3 + Vector::from_element(3, 0.01)).collect();
        for f in suite_for(FunctionClass::Dirichlet, 3, &center, &pos, Some(&simplex), 11).unwrap() {
            f.self_test(&pos, 1e-6).unwrap();
        }
    }

    #[test]
    fn suite_is_seeded() {
        let c = Vector::zeros(2);
        let x = Vector::from_vec(vec![0.3, 0.7]);
        let a: Vec<f64> = base_suite(2, &c, 5).iter().map(|f| f.eval(&x)).collect();
        let b: Vec<f64> = base_suite(2, &c, 5).iter().map(|f| f.eval(&x)).collect();
        let e: Vec<f64> = base_suite(2, &c, 6).iter().map(|f| f.eval(&x)).collect();
        assert_eq!(a, b);
        assert_ne!(a, e);
    }

    #[test]
    fn lipschitz_and_bubble_properties() {
        let pts = points(2, 200);
        let suite = suite_for(FunctionClass::Lipschitz, 2, &Vector::zeros(2), &pts, None, 1).unwrap();
        for f in &suite {
            assert!(f.id.ends_with("_lip"));
            for x in &pts {
                assert!(f.grad(x).norm() <= 1.0);
            }
        }
        let body = ConvexBody::Ball { dim: 2, radius: 1.0 };
        let dir = suite_for(FunctionClass::Dirichlet, 2, &Vector::zeros(2), &pts, Some(&body), 1).unwrap();
        let edge = Vector::from_vec(vec![0.6, 0.8]);
        for f in &dir {
            assert!(f.vanishes_on_boundary && f.eval(&edge).abs() < 1e-14);
        }
    }

    #[test]
    fn selection_by_id() {
        let s = base_suite(2, &Vector::zeros(2), 1);
        let picked = select(s, &["x2".to_string(), "sum".to_string()]).unwrap();
        assert_eq!(picked.len(), 2);
        assert_eq!(picked[0].id, "x2");
        assert!(select(base_suite(1, &Vector::zeros(1), 1), &["nope".to_string()]).is_err());
    }
}
