//! Inequalities with boundary terms on convex bodies, through the radial
//! conformal metric `exp(2 phi) Id` with `phi = -(theta/2) log(|x|^2 + eps)`.

use std::sync::Arc;

use super::{flag, invalid, BoundaryTerm, Hypothesis, InequalityInstance, LhsKind, Params};
use crate::convex_geometry::ConvexBody;
use crate::error::{Error, Result};
use crate::fields::{Vector, ZeroPotential};
use crate::linalg::{min_eigenvalue, spd_inverse};
use crate::metric_families::{conformal_boundary, conformal_ricci_n, default_radial_eps, hardy_theta, ConformalMetricData};
use crate::tensor_core::check_dimension_parameter;
use crate::verification_engine::measures::{BodySpec, Measure, MeasureSpec};
use crate::verification_engine::{FunctionClass, QuadraticFormField};

fn unit_ball() -> MeasureSpec {
    MeasureSpec::Uniform { body: BodySpec::Ball { radius: 1.0 } }
}

fn uniform_body(dim: usize, params: &Params) -> Result<(Arc<Measure>, ConvexBody)> {
    let measure = params.measure_or(dim, unit_ball())?;
    if !matches!(measure.spec, MeasureSpec::Uniform { .. }) {
        return Err(invalid("measure", "must be uniform on a body"));
    }
    let body = params.body_for(&measure)?;
    Ok((measure, body))
}

fn dimension_param(params: &Params, dim: usize) -> Result<f64> {
    match &params.n {
        Some(n) => n.value(),
        None => Ok(-(dim as f64)),
    }
}

fn reciprocal(n: f64) -> f64 {
    if n.is_infinite() {
        0.0
    } else {
        1.0 / n
    }
}

/// `Var(f) N/(N-1) <= int <Ric_{g,mu,N}^{-1} df, df> + boundary term`, on a
/// body with the radial conformal metric.
///
/// Part 1: boundary term `(f - C)^2 / H_{g,mu}` against the weighted
/// boundary measure. Part 2: no boundary term when `II_g >= 0`.
/// Part 3: `int f^2` for `f` vanishing on the boundary.
pub(super) fn dim_bl_boundary(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let (measure, body) = uniform_body(dim, params)?;
    let part = params.part.unwrap_or(1);
    let n = dimension_param(params, dim)?;
    if n == 0.0 {
        return Err(invalid("n", "N = 0 is not admissible here"));
    }
    check_dimension_parameter(n, dim)?;
    if n == dim as f64 {
        return Err(Error::InvalidDimensionParameter { n, dim });
    }
    let default_theta = if n.is_infinite() { 0.5 } else { hardy_theta(n, dim) };
    let theta = params.theta.unwrap_or(if default_theta > 0.0 { default_theta } else { 0.5 });
    let eps = params.eps.unwrap_or_else(|| default_radial_eps(body.circumradius()));
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    let data = Arc::new(ConformalMetricData::radial(dim, theta, eps));
    let zero = ZeroPotential(dim);
    let ricci = {
        let data = data.clone();
        move |x: &Vector| conformal_ricci_n(&data, &zero, n, x)
    };
    let mut inst = InequalityInstance::new("dim_bl_boundary", measure);
    inst.lhs_scale = if n.is_infinite() { 1.0 } else { n / (n - 1.0) };
    let r = ricci.clone();
    inst.rhs_weight = QuadraticFormField::full(dim, move |x| spd_inverse(&r(x)?).ok_or_else(|| Error::DegenerateHessian { point: x.iter().copied().collect() }));
    inst.hypotheses.push(Hypothesis::global("dimension_parameter", 1.0 / dim as f64 - reciprocal(n)));
    inst.hypotheses.push(Hypothesis::interior("ricci_positive_definite", move |x| Ok(min_eigenvalue(&ricci(x)?))));
    let boundary_data = {
        let (data, body) = (data.clone(), body.clone());
        move |y: &Vector, normal: &Vector| {
            let (ii0, h0) = body.boundary_curvature(y)?;
            conformal_boundary(&data, &ZeroPotential(dim), y, normal, &ii0, h0)
        }
    };
    match part {
        1 => {
            let b = boundary_data.clone();
            inst.boundary = Some(BoundaryTerm {
                body,
                weight: Arc::new(move |y, normal| {
                    let cb = b(y, normal)?;
                    Ok(cb.measure_factor / cb.h_gmu)
                }),
                free_constant: true,
                scale: 1.0,
            });
            inst.hypotheses.push(Hypothesis::boundary("mean_convexity", move |y, normal| Ok(boundary_data(y, normal)?.h_gmu)));
        }
        2 => {
            inst.hypotheses.push(Hypothesis::boundary("boundary_locally_convex", move |y, normal| Ok(min_eigenvalue(&boundary_data(y, normal)?.ii_g))));
        }
        3 => {
            inst.lhs_kind = LhsKind::L2Dirichlet;
            inst.function_class = FunctionClass::Dirichlet;
            inst.hypotheses.push(Hypothesis::boundary("mean_convexity", move |y, normal| Ok(boundary_data(y, normal)?.h_gmu)));
        }
        other => return Err(invalid("part", format!("{other} is not in 1..=3"))),
    }
    inst.notes.push(format!("part {part}, N = {n}, theta = {theta}, eps = {eps:e}"));
    Ok(inst)
}

/// `(1/2 - 1/N) d - 3`, and `d/2 - 3` at `N = 0`.
pub fn hardy_dimension_margin(n: f64, dim: usize) -> f64 {
    let d = dim as f64;
    if n == 0.0 {
        d / 2.0 - 3.0
    } else {
        (0.5 - 1.0 / n) * d - 3.0
    }
}

fn star_shaped(inst: &mut InequalityInstance, body: &ConvexBody) {
    let inside = !matches!(body, ConvexBody::Simplex { .. }) && body.contains(&Vector::zeros(body.dim()));
    inst.hypotheses.push(Hypothesis::global("origin_interior", flag(inside)));
}

/// `Var(f)/(1-N) <= 4/(d(d-N)) int |x|^2 |grad f|^2 + boundary term` with
/// boundary weight `1/((d-N)/2 <y,n>/|y|^2 - N H_0)`, for `N <= 0`.
pub(super) fn hardy_boundary(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let (measure, body) = uniform_body(dim, params)?;
    let n = dimension_param(params, dim)?;
    if !(n <= 0.0 && n.is_finite()) {
        return Err(invalid("n", "needs a finite N <= 0"));
    }
    let d = dim as f64;
    let mut inst = InequalityInstance::new("hardy_boundary", measure);
    inst.lhs_scale = 1.0 / (1.0 - n);
    let k = 4.0 / (d * (d - n));
    inst.rhs_weight = QuadraticFormField::scalar(dim, move |x| Ok(k * x.norm_squared()));
    let denominator = {
        let body = body.clone();
        move |y: &Vector, normal: &Vector| -> Result<f64> {
            let h0 = if n == 0.0 { 0.0 } else { body.boundary_curvature(y)?.1 };
            Ok((d - n) / 2.0 * y.dot(normal) / y.norm_squared() - n * h0)
        }
    };
    let den = denominator.clone();
    star_shaped(&mut inst, &body);
    inst.boundary = Some(BoundaryTerm { body, weight: Arc::new(move |y, normal| Ok(1.0 / den(y, normal)?)), free_constant: true, scale: 1.0 });
    inst.hypotheses.push(Hypothesis::global("dimension_condition", hardy_dimension_margin(n, dim)));
    inst.hypotheses.push(Hypothesis::boundary("mean_convexity", denominator));
    inst.notes.push(format!("N = {n}"));
    Ok(inst)
}

/// `int f^2 <= 4/d^2 int |x|^2 |grad f|^2` for `f` vanishing on the boundary.
pub(super) fn hardy_dirichlet(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let (measure, body) = uniform_body(dim, params)?;
    let d = dim as f64;
    let mut inst = InequalityInstance::new("hardy_dirichlet", measure);
    inst.lhs_kind = LhsKind::L2Dirichlet;
    inst.function_class = FunctionClass::Dirichlet;
    inst.rhs_weight = QuadraticFormField::scalar(dim, move |x| Ok(4.0 / (d * d) * x.norm_squared()));
    star_shaped(&mut inst, &body);
    Ok(inst)
}

/// `Var(f) <= 4/d^2 int |x|^2 |grad f|^2 + int (f - C)^2 2|y|^2/(d <y,n>)`.
pub(super) fn hardy_n0(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let (measure, body) = uniform_body(dim, params)?;
    let d = dim as f64;
    let mut inst = InequalityInstance::new("hardy_n0", measure);
    inst.rhs_weight = QuadraticFormField::scalar(dim, move |x| Ok(4.0 / (d * d) * x.norm_squared()));
    star_shaped(&mut inst, &body);
    inst.boundary = Some(BoundaryTerm {
        body,
        weight: Arc::new(move |y, normal| Ok(2.0 * y.norm_squared() / (d * y.dot(normal)))),
        free_constant: true,
        scale: 1.0,
    });
    inst.hypotheses.push(Hypothesis::global("dimension_condition", hardy_dimension_margin(0.0, dim)));
    inst.hypotheses.push(Hypothesis::boundary("positive_angle", |y, normal| Ok(y.dot(normal))));
    Ok(inst)
}

/// Bodies with `II >= theta <y,n>/|y|^2 Id`: variance weight
/// `2/(d theta) |x|^2`, entropy weight `4 M^{2(1-theta)}/(d theta) |x|^{2 theta}`
/// with `M = max |x|`.
pub(super) fn strong_boundary(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let (measure, body) = uniform_body(dim, params)?;
    let theta = params.theta.unwrap_or(0.5);
    let form = params.form_or(&["variance", "entropy"])?;
    let d = dim as f64;
    let reach = body.circumradius();
    let mut inst = InequalityInstance::new("strong_boundary", measure);
    if form == "variance" {
        inst.rhs_weight = QuadraticFormField::scalar(dim, move |x| Ok(2.0 / (d * theta) * x.norm_squared()));
    } else {
        inst.lhs_kind = LhsKind::EntropyOfSquare;
        let k = 4.0 * reach.powf(2.0 * (1.0 - theta)) / (d * theta);
        inst.rhs_weight = QuadraticFormField::scalar(dim, move |x| Ok(k * x.norm_squared().powf(theta)));
    }
    inst.hypotheses.push(Hypothesis::global("dimension_at_least_eight", d - 8.0));
    inst.hypotheses.push(Hypothesis::global("theta_range", theta.min(0.5 - theta)));
    inst.hypotheses.push(Hypothesis::boundary("origin_off_boundary", |y, _| Ok(y.norm())));
    let b = body.clone();
    inst.hypotheses.push(Hypothesis::boundary("boundary_convexity", move |y, normal| {
        let (ii, _) = b.boundary_curvature(y)?;
        Ok(min_eigenvalue(&ii) - theta * y.dot(normal) / y.norm_squared())
    }));
    inst.notes.push(format!("form {form}, theta = {theta}"));
    Ok(inst)
}
