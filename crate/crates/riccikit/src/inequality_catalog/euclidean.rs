//! Brascamp-Lieb type inequalities with Euclidean or product-metric weights.

use std::sync::Arc;

use super::{hessian_floor, invalid, orthant_margin, Hypothesis, InequalityInstance, LhsKind, MetricSpec, Params};
use crate::error::{Error, Result};
use crate::fields::{Matrix, Vector};
use crate::linalg::{min_eigenvalue, spd_inverse};
use crate::metric_families::{product_ricci, ProductMetricData, ProductProfile};
use crate::transport_legendre::{ke_solve_1d, monotone_map_1d, Density1D, KeOptions};
use crate::verification_engine::measures::{BodySpec, Measure, MeasureSpec, ProfileSpec};
use crate::verification_engine::QuadraticFormField;

fn gaussian() -> MeasureSpec {
    MeasureSpec::Gaussian { variance: 1.0, correlation: 0.0 }
}

fn inverse_or_error(m: &Matrix, x: &Vector) -> Result<Matrix> {
    spd_inverse(m).ok_or_else(|| Error::DegenerateHessian { point: x.iter().copied().collect() })
}

/// `(D^2 V)^{-1}`.
pub(super) fn classical_bl(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, gaussian())?;
    let v = measure.potential().clone();
    let mut inst = InequalityInstance::new("classical_bl", measure);
    let w = v.clone();
    inst.rhs_weight = QuadraticFormField::full(dim, move |x| inverse_or_error(&w.hessian(x), x));
    inst.hypotheses.push(Hypothesis::interior("hessian_positive_definite", hessian_floor(v)));
    Ok(inst)
}

fn product_metric(spec: &MetricSpec, dim: usize) -> Result<Option<ProductMetricData>> {
    Ok(match *spec {
        MetricSpec::Euclidean => None,
        MetricSpec::ProductPower { p } if p.is_finite() => Some(ProductMetricData::uniform(dim, ProductProfile::Power { p })),
        MetricSpec::ProductExp { lambda } if lambda.is_finite() => Some(ProductMetricData::uniform(dim, ProductProfile::Exp { lambda })),
        _ => return Err(invalid("metric", "non-finite metric parameter")),
    })
}

/// `Ric_{g,mu}^{-1}` for a Euclidean or product metric.
pub(super) fn generalized_bl(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, gaussian())?;
    let spec = params.metric.clone().unwrap_or(MetricSpec::Euclidean);
    let metric = product_metric(&spec, dim)?;
    let v = measure.potential().clone();
    let orthant = orthant_margin(&measure);
    let mut inst = InequalityInstance::new("generalized_bl", measure);
    let ricci: Arc<dyn Fn(&Vector) -> Result<Matrix> + Send + Sync> = match metric {
        None => {
            let v = v.clone();
            Arc::new(move |x| Ok(v.hessian(x)))
        }
        Some(data) => {
            let v = v.clone();
            Arc::new(move |x| product_ricci(&data, v.as_ref(), x))
        }
    };
    let r = ricci.clone();
    inst.rhs_weight = QuadraticFormField::full(dim, move |x| inverse_or_error(&r(x)?, x));
    inst.hypotheses.push(Hypothesis::interior("ricci_positive_definite", move |x| Ok(min_eigenvalue(&ricci(x)?))));
    if matches!(spec, MetricSpec::ProductPower { .. }) {
        inst.hypotheses.push(Hypothesis::global("support_in_orthant", orthant));
    }
    Ok(inst)
}

/// Coordinate law of a product measure.
fn coordinate_law<'a>(measure: &'a Measure, name: &str) -> Result<&'a Density1D> {
    measure.coordinate_density().ok_or_else(|| invalid(name, "must be a product measure"))
}

/// `2 (D^2 V + T'^2 W''(T) + (1/2d) v v^T)^{-1}` with `T` the coordinatewise
/// monotone map from `mu` to `nu` and `v_i = V'(x_i) - T_i' W'(T_i)`.
pub(super) fn refined_bl(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let quadratic = MeasureSpec::Product { profile: ProfileSpec::Quadratic { sigma: 1.0, center: 0.0 }, lower: None, upper: None };
    let measure = params.measure_or(dim, quadratic)?;
    let target_spec = params.target.clone().unwrap_or(MeasureSpec::Product { profile: ProfileSpec::Flat, lower: Some(-1.0), upper: Some(1.0) });
    let target = Measure::new(&target_spec, 1)?;
    let mu = coordinate_law(&measure, "measure")?.clone();
    let nu = coordinate_law(&target, "target")?.clone();
    let v = mu.profile().clone();
    let w = nu.profile().clone();
    let df = dim as f64;
    let weight = {
        let (mu, nu, v, w) = (mu.clone(), nu.clone(), v.clone(), w.clone());
        move |x: &Vector| -> Result<Matrix> {
            let mut m = Matrix::zeros(dim, dim);
            let mut grad = Vector::zeros(dim);
            for i in 0..dim {
                let (t, dt) = monotone_map_1d(&mu, &nu, x[i])?;
                let dv = v.derivatives(x[i]);
                let dw = w.derivatives(t);
                m[(i, i)] = dv[2] + dt * dt * dw[2];
                grad[i] = dv[1] - dt * dw[1];
            }
            m += &grad * grad.transpose() / (2.0 * df);
            Ok(inverse_or_error(&m, x)? * 2.0)
        }
    };
    let mut inst = InequalityInstance::new("refined_bl", measure.clone());
    inst.rhs_weight = QuadraticFormField::full(dim, weight);
    let vv = v.clone();
    inst.hypotheses.push(Hypothesis::interior("source_strongly_convex", move |x| Ok(x.iter().fold(f64::INFINITY, |a, &t| a.min(vv.derivatives(t)[2])))));
    inst.hypotheses.push(Hypothesis::interior("target_convex", move |x| {
        let mut floor = f64::INFINITY;
        for &t in x.iter() {
            let (s, _) = monotone_map_1d(&mu, &nu, t)?;
            floor = floor.min(w.derivatives(s)[2]);
        }
        Ok(floor)
    }));
    inst.notes.push(format!("target {}", serde_json::to_string(&target_spec).unwrap_or_default()));
    Ok(inst)
}

/// `2 (D^2 V + (1/2d) grad V grad V^T)^{-1}`.
pub(super) fn negdim_bl(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, gaussian())?;
    let v = measure.potential().clone();
    let mut inst = InequalityInstance::new("negdim_bl", measure);
    let w = v.clone();
    let df = dim as f64;
    inst.rhs_weight = QuadraticFormField::full(dim, move |x| {
        let g = w.gradient(x);
        let m = w.hessian(x) + &g * g.transpose() / (2.0 * df);
        Ok(inverse_or_error(&m, x)? * 2.0)
    });
    inst.hypotheses.push(Hypothesis::interior("hessian_positive_definite", hessian_floor(v)));
    Ok(inst)
}

fn half_ball() -> MeasureSpec {
    MeasureSpec::Uniform { body: BodySpec::Ball { radius: 0.5 } }
}

/// Coordinate law of a one-dimensional measure, uniform ones included.
fn law_1d(measure: &Measure) -> Result<Density1D> {
    match measure.coordinate_density() {
        Some(d) => Ok(d.clone()),
        None => {
            let (a, b) = measure.coordinate_bounds();
            Density1D::uniform(a, b)
        }
    }
}

/// Barycenter margin: exact for product laws and symmetric bodies,
/// otherwise the grid mean against four standard errors.
fn barycenter_margin(measure: &Measure) -> Result<f64> {
    const TOL: f64 = 1e-8;
    if let Some(d) = measure.coordinate_density() {
        return Ok(TOL - d.mean().abs() * (measure.dim as f64).sqrt());
    }
    if measure.is_unconditional() {
        return Ok(TOL);
    }
    let grid = measure.sample(20_000, super::HYPOTHESIS_SEED, "hypothesis/barycenter")?;
    let n = grid.len() as f64;
    let mean = grid.points.iter().fold(Vector::zeros(measure.dim), |a, x| a + x) / n;
    let spread = grid.points.iter().map(|x| (x - &mean).norm_squared()).sum::<f64>() / n;
    Ok(4.0 * (spread / n).sqrt() - mean.norm())
}

fn support_radius(params: &Params, measure: &Measure) -> Result<f64> {
    let r = params.radius.unwrap_or_else(|| measure.support_radius());
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("radius", "needs a compactly supported measure or an explicit positive radius"));
    }
    Ok(r)
}

/// `2 (Id/(2R^2) + D^2 W)^{-1}` for `nu = exp(-W)` supported in `B_R`.
pub(super) fn compact_bl(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, half_ball())?;
    let r = support_radius(params, &measure)?;
    let v = measure.potential().clone();
    let reach = measure.support_radius();
    let bary = barycenter_margin(&measure)?;
    let law = if dim == 1 { Some(law_1d(&measure)?) } else { None };
    let mut inst = InequalityInstance::new("compact_bl", measure);
    let w = v.clone();
    let shift = 1.0 / (2.0 * r * r);
    inst.rhs_weight = QuadraticFormField::full(dim, move |x| {
        let m = w.hessian(x) + Matrix::identity(dim, dim) * shift;
        Ok(inverse_or_error(&m, x)? * 2.0)
    });
    inst.hypotheses.push(Hypothesis::global("barycenter_at_origin", bary));
    inst.hypotheses.push(Hypothesis::global("support_in_ball", r - reach));
    inst.hypotheses.push(Hypothesis::interior("potential_convex", hessian_floor(v)));
    if let Some(law) = law {
        let solution = ke_solve_1d(&law, &KeOptions::default());
        let (residual, curvature) = match &solution {
            Ok(s) => (1e-8 - s.residual, 2.0 * r * r - s.max_curvature()),
            Err(_) => (f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        inst.hypotheses.push(Hypothesis::global("fixed_point_converged", residual));
        inst.hypotheses.push(Hypothesis::global("fixed_point_curvature_bound", curvature));
    }
    Ok(inst)
}

/// `2 R^2 |grad f|^2` for log-concave `nu` supported in `B_R`.
pub(super) fn payne_weinberger(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, half_ball())?;
    let r = support_radius(params, &measure)?;
    let v = measure.potential().clone();
    let reach = measure.support_radius();
    let bary = barycenter_margin(&measure)?;
    let mut inst = InequalityInstance::new("payne_weinberger", measure);
    inst.rhs_weight = QuadraticFormField::constant_identity(dim, 2.0 * r * r);
    inst.hypotheses.push(Hypothesis::global("barycenter_at_origin", bary));
    inst.hypotheses.push(Hypothesis::global("support_in_ball", r - reach));
    inst.hypotheses.push(Hypothesis::interior("potential_convex", hessian_floor(v)));
    Ok(inst)
}

/// `Ent(f^2) <= (2/rho) int |grad f|^2` when `D^2 V >= rho`.
pub(super) fn bakry_emery_lsi(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let measure = params.measure_or(dim, gaussian())?;
    let v = measure.potential().clone();
    let rho = match params.rho {
        Some(r) => params.positive("rho", Some(r), None)?,
        None => {
            let grid = measure.sample(crate::tolerances::HYPOTHESIS_GRID, super::HYPOTHESIS_SEED, "hypothesis/curvature")?;
            let floor = grid.points.iter().map(|x| min_eigenvalue(&v.hessian(x))).fold(f64::INFINITY, f64::min);
            if !(floor > 0.0) {
                return Err(Error::HypothesisViolated { name: "hessian_positive_definite".into(), location: vec![], margin: floor });
            }
            floor
        }
    };
    let mut inst = InequalityInstance::new("bakry_emery_lsi", measure);
    inst.lhs_kind = LhsKind::EntropyOfSquare;
    inst.rhs_weight = QuadraticFormField::constant_identity(dim, 1.0);
    inst.rhs_constant = 2.0 / rho;
    let h = hessian_floor(v);
    inst.hypotheses.push(Hypothesis::interior("curvature_lower_bound", move |x| Ok(h(x)? - rho)));
    inst.notes.push(format!("rho = {rho:e}"));
    Ok(inst)
}
