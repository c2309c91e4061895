//! Log-Sobolev inequalities from the entropic curvature criterion.

use std::sync::Arc;

use super::{invalid, Hypothesis, InequalityInstance, LhsKind, Params};
use crate::error::Result;
use crate::fields::{PowerProfile, Profile1D, Vector};
use crate::metric_families::ric_1d_exact;
use crate::transport_legendre::{entropic_condition_check, legendre_1d, max_entropic_rho, CappedPowerDual, LegendreData};
use crate::verification_engine::measures::{MeasureSpec, ProfileSpec};
use crate::verification_engine::QuadraticFormField;

/// Grid size of the primal and dual tables.
const LEGENDRE_POINTS: usize = 4001;
/// Upper end of the bisection for the entropic curvature.
const RHO_SEARCH_MAX: f64 = 10.0;
/// Dual grid of the capped power conjugate: `[0, 50]` with step `1e-3`.
const CAPPED_DUAL_MAX: f64 = 50.0;
const CAPPED_DUAL_STEP: f64 = 1e-3;

fn entropy_instance(id: &str, spec: MeasureSpec, dim: usize) -> Result<InequalityInstance> {
    let measure = Arc::new(crate::verification_engine::Measure::new(&spec, dim)?);
    let mut inst = InequalityInstance::new(id, measure);
    inst.lhs_kind = LhsKind::EntropyOfSquare;
    Ok(inst)
}

/// Diagonal weight `w(x_i)`.
fn coordinatewise(dim: usize, w: impl Fn(f64) -> f64 + Send + Sync + 'static) -> QuadraticFormField {
    QuadraticFormField::diagonal(dim, move |x: &Vector| Ok(x.map(&w)))
}

/// Entropic curvature of a one-dimensional law from its tabulated conjugate.
pub fn entropic_rho_1d(profile: Arc<dyn Profile1D>, range: (f64, f64)) -> Result<(f64, LegendreData)> {
    let (a, b) = range;
    let xs: Vec<f64> = (0..LEGENDRE_POINTS).map(|i| a + (b - a) * i as f64 / (LEGENDRE_POINTS - 1) as f64).collect();
    let ys: Vec<f64> = xs[1..LEGENDRE_POINTS - 1].iter().map(|&x| profile.derivatives(x)[1]).collect();
    let (_, data) = legendre_1d(profile, xs, &ys)?;
    Ok((max_entropic_rho(&data, RHO_SEARCH_MAX), data))
}

/// `Ent(f^2) <= (2/rho) int sum f_i^2 / V''(x_i)` for a product measure.
pub(super) fn entropic_bl(dim: usize, params: &Params) -> Result<InequalityInstance> {
    let default = MeasureSpec::Product { profile: ProfileSpec::Quadratic { sigma: 1.0, center: 0.0 }, lower: None, upper: None };
    let measure = params.measure_or(dim, default)?;
    let law = measure.coordinate_density().ok_or_else(|| invalid("measure", "must be a product measure"))?.clone();
    let profile = law.profile().clone();
    let (fitted, data) = entropic_rho_1d(profile.clone(), law.range())?;
    let rho = match params.rho {
        Some(r) => params.positive("rho", Some(r), None)?,
        None => fitted,
    };
    let mut inst = InequalityInstance::new("entropic_bl", measure);
    inst.lhs_kind = LhsKind::EntropyOfSquare;
    let p = profile.clone();
    inst.rhs_weight = coordinatewise(dim, move |t| 1.0 / p.derivatives(t)[2]);
    inst.rhs_constant = 2.0 / rho;
    inst.hypotheses.push(Hypothesis::interior("potential_strongly_convex", move |x| Ok(x.iter().fold(f64::INFINITY, |a, &t| a.min(profile.derivatives(t)[2])))));
    let report = entropic_condition_check(&data, rho);
    inst.hypotheses.push(Hypothesis::global("entropic_curvature", if rho > 0.0 && report.convex { rho } else { -rho.abs().max(1.0) }));
    inst.notes.push(format!("rho = {rho:e}"));
    Ok(inst)
}

fn exponent(params: &Params, default: f64) -> Result<f64> {
    let q = params.q.unwrap_or(default);
    if !q.is_finite() {
        return Err(invalid("q", "must be finite"));
    }
    Ok(q)
}

/// `mu_q = exp(-c x^q)` on the half-line: weight `x^{2-q}`, constant `4/(c q^2)`.
pub(super) fn muq_lsi(dim: usize, params: &Params) -> Result<InequalityInstance> {
    params.no_measure("muq_lsi")?;
    let q = exponent(params, 1.5)?;
    let c = params.positive("c", params.c, Some(1.0))?;
    let spec = MeasureSpec::Product { profile: ProfileSpec::Power { c, q }, lower: Some(0.0), upper: None };
    let mut inst = entropy_instance("muq_lsi", spec, dim)?;
    inst.rhs_weight = coordinatewise(dim, move |t| t.powf(2.0 - q));
    inst.rhs_constant = 4.0 / (c * q * q);
    inst.hypotheses.push(Hypothesis::global("exponent_in_range", (q - 1.0).min(2.0 - q)));
    let profile = PowerProfile { c, q };
    let floor = q / (2.0 * (q - 1.0));
    inst.hypotheses.push(Hypothesis::interior("curvature_ratio", move |x| {
        let mut m = f64::INFINITY;
        for &t in x.iter() {
            m = m.min(ric_1d_exact(&profile, t)? / profile.derivatives(t)[2] - floor);
        }
        Ok(m)
    }));
    Ok(inst)
}

/// Change of variables `t = x^q` applied to `mu_q`.
///
/// `literal`: exponential law `Exp(c)`, weight `t^{1/q}`, constant `4/(cq)`.
/// `pushforward`: the actual image law `Gamma(1/q, c)`, weight `t`, constant `4/c`.
pub(super) fn bakry_t_lsi(dim: usize, params: &Params) -> Result<InequalityInstance> {
    params.no_measure("bakry_t_lsi")?;
    let q = exponent(params, 1.5)?;
    let c = params.positive("c", params.c, Some(1.0))?;
    let form = params.form_or(&["literal", "pushforward"])?;
    let mut inst = if form == "literal" {
        let spec = MeasureSpec::Product { profile: ProfileSpec::Linear { slope: c }, lower: Some(0.0), upper: None };
        let mut inst = entropy_instance("bakry_t_lsi", spec, dim)?;
        inst.rhs_weight = coordinatewise(dim, move |t| t.powf(1.0 / q));
        inst.rhs_constant = 4.0 / (c * q);
        inst
    } else {
        let spec = MeasureSpec::Product { profile: ProfileSpec::Gamma { shape: 1.0 / q, rate: c }, lower: Some(0.0), upper: None };
        let mut inst = entropy_instance("bakry_t_lsi", spec, dim)?;
        inst.rhs_weight = coordinatewise(dim, |t| t);
        inst.rhs_constant = 4.0 / c;
        inst
    };
    inst.hypotheses.push(Hypothesis::global("exponent_in_range", (q - 1.0).min(2.0 - q)));
    inst.notes.push(format!("form {form}"));
    Ok(inst)
}

/// Entropic curvature of the capped power law, tabulated from its conjugate.
pub fn capped_power_rho(q: f64) -> Result<f64> {
    let steps = (CAPPED_DUAL_MAX / CAPPED_DUAL_STEP).round() as usize;
    let ys: Vec<f64> = (0..=steps).map(|i| i as f64 * CAPPED_DUAL_STEP).collect();
    let data = LegendreData::from_dual(&CappedPowerDual { q }, &ys)?;
    Ok(max_entropic_rho(&data, RHO_SEARCH_MAX))
}

/// `q > 2` on the half-line with weight `min(1, x^{2-q})`.
///
/// `modified`: the capped power potential, constant `2/rho_q` from the
/// entropic criterion. `power`: `exp(-x^q)` itself, whose constant is not
/// numeric, reported against constant 1.
pub(super) fn qgt2_lsi(dim: usize, params: &Params) -> Result<InequalityInstance> {
    params.no_measure("qgt2_lsi")?;
    let q = exponent(params, 3.0)?;
    if !(q > 2.0) {
        return Err(invalid("q", "needs q > 2"));
    }
    let form = params.form_or(&["modified", "power"])?;
    let weight = move |t: f64| t.powf(2.0 - q).min(1.0);
    let mut inst = if form == "modified" {
        let rho = capped_power_rho(q)?;
        let spec = MeasureSpec::Product { profile: ProfileSpec::CappedPower { q }, lower: Some(0.0), upper: None };
        let mut inst = entropy_instance("qgt2_lsi", spec, dim)?;
        inst.rhs_constant = 2.0 / rho;
        inst.hypotheses.push(Hypothesis::global("entropic_curvature", rho));
        inst.notes.push(format!("rho = {rho:e}"));
        inst
    } else {
        let spec = MeasureSpec::Product { profile: ProfileSpec::Power { c: 1.0, q }, lower: Some(0.0), upper: None };
        let mut inst = entropy_instance("qgt2_lsi", spec, dim)?;
        inst.constant_known = false;
        inst
    };
    inst.rhs_weight = coordinatewise(dim, weight);
    inst.notes.push(format!("form {form}"));
    Ok(inst)
}
