//! Product-metric inequalities on orthants, transfer to unconditional
//! measures, and cone-measure bounds on orthant-unconditional bodies.

use std::sync::Arc;

use super::{flag, gradient_floor, hessian_floor, invalid, orthant_margin, ExtraTerm, Hypothesis, InequalityInstance, LhsKind, Params, ProbeMode, HYPOTHESIS_SEED};
use crate::convex_geometry::{diagonality_bounds, ConvexBody};
use crate::error::Result;
use crate::fields::{Matrix, PotentialField, Vector};
use crate::linalg::{min_eigenvalue, spd_inverse};
use crate::metric_families::{poly_product_rho, poly_product_rho_bounded, product_ricci, ProductMetricData, ProductProfile};
use crate::tolerances::HYPOTHESIS_GRID;
use crate::verification_engine::measures::{cone_boundary_sample, BodySpec, Measure, MeasureSpec, ProfileSpec};
use crate::verification_engine::{FunctionClass, QuadraticFormField};

fn exponential_orthant() -> MeasureSpec {
    MeasureSpec::Product { profile: ProfileSpec::Linear { slope: 1.0 }, lower: Some(0.0), upper: None }
}

fn diagonal(dim: usize, w: impl Fn(f64) -> f64 + Send + Sync + 'static) -> QuadraticFormField {
    QuadraticFormField::diagonal(dim, move |x: &Vector| Ok(x.map(&w)))
}

/// `min eig(diag(x^p) Ric diag(x^p)) - rho` for the `x^{-2p}` product metric.
fn scaled_ricci_floor(v: Arc<dyn PotentialField>, p: f64, rho: f64) -> impl Fn(&Vector) -> Result<f64> + Send + Sync + 'static {
    let data = ProductMetricData::uniform(v.dim(), ProductProfile::Power { p });
    move |x| {
        let ric = product_ricci(&data, v.as_ref(), x)?;
        let s = Matrix::from_diagonal(&x.map(|t| t.powf(p)));
        Ok(min_eigenvalue(&(&s * ric * &s)) - rho)
    }
}

fn exponent_in(params: &Params, lo: f64, hi: f64, default: f64) -> Result<f64> {
    let p = params.p.unwrap_or(default);
    if !(p >= lo && p < hi) {
        return Err(invalid("p", format!("must lie in [{lo}, {hi})")));
    }
    Ok(p)
}

/// The five consequences of the `x^{-2p}` product-metric curvature bound.
pub(super) fn poly_product(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, exponential_orthant())?;
    let part = params.part.unwrap_or(2);
    let v = measure.potential().clone();
    let orthant = orthant_margin(&measure);
    let (_, upper) = measure.coordinate_bounds();
    let mut inst = InequalityInstance::new("poly_product", measure);
    inst.hypotheses.push(Hypothesis::global("support_in_orthant", orthant));
    match part {
        1 => {
            let p = exponent_in(params, 0.0, 1.0 + f64::EPSILON, 0.5)?;
            let data = ProductMetricData::uniform(dim, ProductProfile::Power { p });
            let (w, d2) = (v.clone(), data.clone());
            inst.rhs_weight = QuadraticFormField::full(dim, move |x| {
                let ric = product_ricci(&d2, w.as_ref(), x)?;
                spd_inverse(&ric).ok_or_else(|| crate::Error::DegenerateHessian { point: x.iter().copied().collect() })
            });
            inst.hypotheses.push(Hypothesis::interior("ricci_positive_definite", move |x| Ok(min_eigenvalue(&product_ricci(&data, v.as_ref(), x)?))));
            inst.singular_at_origin = true;
        }
        2 => {
            inst.rhs_weight = diagonal(dim, |t| 4.0 * t * t);
            inst.hypotheses.push(Hypothesis::interior("potential_convex", hessian_floor(v.clone())));
            inst.hypotheses.push(Hypothesis::interior("potential_nondecreasing", gradient_floor(v, 0.0)));
        }
        3 => {
            let lambda = params.positive("lambda", params.lambda, Some(1.0))?;
            inst.rhs_weight = diagonal(dim, move |t| t / lambda);
            inst.hypotheses.push(Hypothesis::interior("potential_convex", hessian_floor(v.clone())));
            inst.hypotheses.push(Hypothesis::interior("gradient_lower_bound", gradient_floor(v, lambda)));
        }
        4 => {
            let p = exponent_in(params, f64::MIN_POSITIVE, 1.0, 0.5)?;
            let r = params.positive("radius", params.radius, upper.is_finite().then_some(upper))?;
            let rho = poly_product_rho_bounded(p, r);
            inst.lhs_kind = LhsKind::EntropyOfSquare;
            inst.rhs_weight = diagonal(dim, move |t| t.powf(2.0 * p));
            inst.rhs_constant = 2.0 / rho;
            inst.hypotheses.push(Hypothesis::global("support_in_cube", r - upper));
            inst.hypotheses.push(Hypothesis::interior("potential_convex", hessian_floor(v.clone())));
            inst.hypotheses.push(Hypothesis::interior("potential_nondecreasing", gradient_floor(v.clone(), 0.0)));
            inst.hypotheses.push(Hypothesis::interior("ricci_lower_bound", scaled_ricci_floor(v, p, rho)));
            inst.notes.push(format!("rho = {rho:e}"));
        }
        5 => {
            let p = exponent_in(params, 0.5, 1.0, 0.5)?;
            let lambda = params.positive("lambda", params.lambda, Some(1.0))?;
            let rho = poly_product_rho(p, lambda);
            inst.lhs_kind = LhsKind::EntropyOfSquare;
            inst.rhs_weight = diagonal(dim, move |t| t.powf(2.0 * p));
            inst.rhs_constant = 2.0 / rho;
            inst.hypotheses.push(Hypothesis::interior("potential_convex", hessian_floor(v.clone())));
            inst.hypotheses.push(Hypothesis::interior("gradient_lower_bound", gradient_floor(v.clone(), lambda)));
            inst.hypotheses.push(Hypothesis::interior("ricci_lower_bound", scaled_ricci_floor(v, p, rho)));
            inst.notes.push(format!("rho = {rho:e}"));
        }
        other => return Err(invalid("part", format!("{other} is not in 1..=5"))),
    }
    inst.notes.push(format!("part {part}"));
    Ok(inst)
}

/// Slope of the linear part of the potential, when the measure has one.
fn linear_rate(spec: &MeasureSpec) -> Option<f64> {
    match spec {
        MeasureSpec::SimplexRadial { lambda, .. } => Some(*lambda),
        MeasureSpec::Product { profile: ProfileSpec::Linear { slope }, .. } => Some(*slope),
        _ => None,
    }
}

/// Exponential product metric: weight `1/(lambda_i (V_i - lambda_i))`, or
/// the corollary `4/lambda^2` when `V_i >= lambda`.
pub(super) fn exp_product(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, MeasureSpec::SimplexRadial { lambda: 1.0, kappa: 0.5 })?;
    let form = params.form_or(&["corollary", "general"])?;
    let v = measure.potential().clone();
    let rate = linear_rate(&measure.spec);
    let mut inst = InequalityInstance::new("exp_product", measure);
    inst.hypotheses.push(Hypothesis::interior("potential_convex", hessian_floor(v.clone())));
    if form == "corollary" {
        let lambda = params.positive("lambda", params.lambda, rate)?;
        inst.rhs_weight = QuadraticFormField::constant_identity(dim, 4.0 / (lambda * lambda));
        inst.hypotheses.push(Hypothesis::interior("gradient_lower_bound", gradient_floor(v, lambda)));
    } else {
        let lambdas = match (&params.lambdas, params.lambda.or(rate)) {
            (Some(l), _) if l.len() == dim => l.clone(),
            (Some(_), _) => return Err(invalid("lambdas", format!("needs {dim} entries"))),
            (None, Some(l)) => vec![l; dim],
            (None, None) => return Err(invalid("lambdas", "is required")),
        };
        if lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(invalid("lambdas", "entries must be positive"));
        }
        let ls = Vector::from_vec(lambdas);
        let (w, l2) = (v.clone(), ls.clone());
        inst.rhs_weight = QuadraticFormField::diagonal(dim, move |x| {
            let g = w.gradient(x);
            Ok(Vector::from_iterator(dim, (0..dim).map(|i| 1.0 / (l2[i] * (g[i] - l2[i])))))
        });
        inst.hypotheses.push(Hypothesis::interior("gradient_lower_bound", move |x| {
            let g = v.gradient(x);
            Ok((0..dim).map(|i| g[i] - ls[i]).fold(f64::INFINITY, f64::min))
        }));
    }
    inst.notes.push(format!("form {form}"));
    Ok(inst)
}

/// `4 int sum x_i^2 f_i^2 + max_i int x_i^2 * int |grad f|^2` for
/// unconditional log-concave measures.
pub(super) fn klartag_transfer(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let symmetric_exponential = MeasureSpec::Product { profile: ProfileSpec::Abs { rate: 1.0 }, lower: None, upper: None };
    let measure = params.measure_or(dim, symmetric_exponential)?;
    let v = measure.potential().clone();
    let unconditional = measure.is_unconditional();
    let mut inst = InequalityInstance::new("klartag_transfer", measure);
    inst.rhs_weight = diagonal(dim, |t| 4.0 * t * t);
    inst.extras.push(ExtraTerm::CoordinateMomentDirichlet);
    inst.hypotheses.push(Hypothesis::global("unconditional", flag(unconditional)));
    inst.hypotheses.push(Hypothesis::interior("potential_convex", hessian_floor(v)));
    Ok(inst)
}

fn standard_simplex() -> BodySpec {
    BodySpec::Simplex { scale: 1.0 }
}

fn orthant_unconditional(spec: &BodySpec) -> bool {
    matches!(spec, BodySpec::Simplex { .. }) || matches!(spec, BodySpec::Cube { lower, .. } if *lower == 0.0)
}

fn body_spec(measure: &Measure) -> Option<&BodySpec> {
    match &measure.spec {
        MeasureSpec::Uniform { body } | MeasureSpec::Cone { body } => Some(body),
        _ => None,
    }
}

/// `(lambda, Lambda)`: bounds of `n_i / <n, y>` over a cone-measure grid.
fn diagonality(body: &ConvexBody) -> Result<(f64, f64)> {
    let grid = cone_boundary_sample(body, HYPOTHESIS_GRID, HYPOTHESIS_SEED, "hypothesis/diagonality")?;
    diagonality_bounds(body, &grid.points)
}

/// `|y|^2 / <y, n>^2` at the radial projection of `x`.
fn angle_field(body: ConvexBody) -> super::PointField {
    Arc::new(move |x: &Vector| {
        let (p, n) = body.gauge_and_normal(x)?;
        let y = x / p;
        let a = y.dot(&n);
        Ok(y.norm_squared() / (a * a))
    })
}

fn orthant_hypotheses(inst: &mut InequalityInstance, spec: &BodySpec, lambda: f64) {
    inst.hypotheses.push(Hypothesis::global("orthant_unconditional", flag(orthant_unconditional(spec))));
    inst.hypotheses.push(Hypothesis::boundary("diagonal_lower_bound", move |y, n| {
        let a = y.dot(n);
        Ok(n.iter().fold(f64::INFINITY, |m, v| m.min(v / a)) - lambda)
    }));
}

/// Variance under the cone measure of 1-Lipschitz functions.
pub(super) fn cone_variance(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let spec = params.body.clone().unwrap_or_else(standard_simplex);
    let measure = Arc::new(Measure::new(&MeasureSpec::Cone { body: spec.clone() }, dim)?);
    let body = measure.body().cloned().ok_or_else(|| invalid("body", "missing"))?;
    let lambda = match params.lambda {
        Some(l) => params.positive("lambda", Some(l), None)?,
        None => diagonality(&body)?.0,
    };
    let mut inst = InequalityInstance::new("cone_variance", measure);
    let df = dim as f64;
    let scale = if dim >= 3 { 4.0 / (lambda * lambda * (df - 1.0) * (df - 2.0)) } else { f64::INFINITY };
    inst.rhs_constant = 0.0;
    inst.extras.push(ExtraTerm::FieldMean { scale, field: angle_field(body) });
    inst.function_class = FunctionClass::Lipschitz;
    inst.hypotheses.push(Hypothesis::global("dimension_at_least_three", df - 3.0));
    orthant_hypotheses(&mut inst, &spec, lambda);
    inst.notes.push(format!("lambda = {lambda:e}"));
    Ok(inst)
}

/// Poincare bound on orthant-unconditional bodies with an unspecified
/// numeric constant; reported against a Rayleigh-quotient probe.
pub(super) fn l1_type(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, MeasureSpec::Uniform { body: standard_simplex() })?;
    let spec = body_spec(&measure).cloned().ok_or_else(|| invalid("measure", "must be uniform on a body"))?;
    let body = params.body_for(&measure)?;
    let form = params.form_or(&["general", "diagonal"])?;
    let (lambda, upper) = diagonality(&body)?;
    let df = dim as f64;
    let mut inst = InequalityInstance::new("l1_type", measure);
    let norm_sq: super::PointField = Arc::new(|x: &Vector| Ok(x.norm_squared()));
    if form == "general" {
        inst.extras.push(ExtraTerm::FieldMeanDirichlet { scale: 1.0 / (df * df), field: norm_sq });
        inst.extras.push(ExtraTerm::FieldMeanDirichlet { scale: 1.0 / (df * df * lambda * lambda), field: angle_field(body) });
    } else {
        let ratio = upper / lambda;
        inst.extras.push(ExtraTerm::FieldMeanDirichlet { scale: (1.0 + (df + 2.0) * ratio * ratio) / (df * df), field: norm_sq });
    }
    inst.rhs_constant = 0.0;
    inst.constant_known = false;
    inst.probe = ProbeMode::AgainstBound;
    inst.singular_at_origin = true;
    orthant_hypotheses(&mut inst, &spec, 0.0);
    inst.notes.push(format!("form {form}, lambda = {lambda:e}, Lambda = {upper:e}"));
    Ok(inst)
}

/// Variance of 1-Lipschitz functions against a probe of the Poincare constant.
pub(super) fn one_lip_reduction(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, MeasureSpec::Uniform { body: standard_simplex() })?;
    let reach = measure.support_radius();
    let v = measure.potential().clone();
    let mut inst = InequalityInstance::new("one_lip_reduction", measure);
    inst.rhs_constant = 0.0;
    inst.extras.push(ExtraTerm::PoincareProbe { scale: 1.0 });
    inst.function_class = FunctionClass::Lipschitz;
    inst.constant_known = false;
    inst.probe = ProbeMode::AgainstSuite;
    inst.hypotheses.push(Hypothesis::global("bounded_support", if reach.is_finite() { reach } else { -1.0 }));
    inst.hypotheses.push(Hypothesis::interior("potential_convex", hessian_floor(v)));
    Ok(inst)
}
