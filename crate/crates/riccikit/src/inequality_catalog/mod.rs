//! Catalog of weighted Poincare, Brascamp-Lieb and log-Sobolev inequalities
//! as evaluable instances: an LHS functional, an RHS weight field, optional
//! extra and boundary terms, and sample-based hypothesis checks.

mod boundary;
mod entropic;
pub use entropic::{capped_power_rho, entropic_rho_1d};
mod euclidean;
mod manifest;
mod product;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex_geometry::ConvexBody;
use crate::error::{Error, Result};
use crate::fields::{PotentialField, Vector};
use crate::linalg::min_eigenvalue;
use crate::tolerances::{HYPOTHESIS_GRID, HYPOTHESIS_SLACK};
use crate::verification_engine::measures::{cone_boundary_sample, BodySpec, Measure, MeasureSpec};
use crate::verification_engine::{FunctionClass, HypothesisMargin, QuadraticFormField};

pub use manifest::{catalog, manifest_json, CatalogEntry, ParamDoc};

/// Root seed of the hypothesis grids; fixed so instantiation is reproducible.
pub const HYPOTHESIS_SEED: u64 = 0x5eed_ca7a_1095;

/// Which functional of `f` sits on the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LhsKind {
    Variance,
    EntropyOfSquare,
    /// `int f^2 dmu`.
    L2Dirichlet,
}

/// A scalar field evaluated at sample points.
pub type PointField = Arc<dyn Fn(&Vector) -> Result<f64> + Send + Sync>;

/// Weight of a boundary term at `(y, n)`.
pub type BoundaryWeight = Arc<dyn Fn(&Vector, &Vector) -> Result<f64> + Send + Sync>;

/// RHS contributions that are not of the form `int <W grad f, grad f>`.
#[derive(Clone)]
pub enum ExtraTerm {
    /// `max_i int x_i^2 dmu * int |grad f|^2 dmu`.
    CoordinateMomentDirichlet,
    /// `scale * int field dmu`.
    FieldMean { scale: f64, field: PointField },
    /// `scale * int field dmu * int |grad f|^2 dmu`.
    FieldMeanDirichlet { scale: f64, field: PointField },
    /// `scale` times a Rayleigh lower bound on the Poincare constant.
    PoincareProbe { scale: f64 },
}

impl fmt::Debug for ExtraTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtraTerm::CoordinateMomentDirichlet => write!(f, "CoordinateMomentDirichlet"),
            ExtraTerm::FieldMean { scale, .. } => write!(f, "FieldMean({scale})"),
            ExtraTerm::FieldMeanDirichlet { scale, .. } => write!(f, "FieldMeanDirichlet({scale})"),
            ExtraTerm::PoincareProbe { scale } => write!(f, "PoincareProbe({scale})"),
        }
    }
}

/// Whether a Rayleigh-quotient probe of the Poincare constant is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    None,
    /// Compared with the Dirichlet coefficient of the extra terms.
    AgainstBound,
    /// Compared with the largest suite variance.
    AgainstSuite,
}

/// `scale * int_{boundary} (f - C)^2 weight dH^{d-1} / Vol`, with `C = 0`
/// or minimized when `free_constant`.
#[derive(Clone)]
pub struct BoundaryTerm {
    pub body: ConvexBody,
    pub weight: BoundaryWeight,
    pub free_constant: bool,
    pub scale: f64,
}

impl fmt::Debug for BoundaryTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryTerm").field("body", &self.body).field("free_constant", &self.free_constant).field("scale", &self.scale).finish()
    }
}

/// Where a hypothesis is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisDomain {
    /// At interior sample points `x`.
    Interior,
    /// At boundary points `y` with outer normal `n`.
    Boundary,
    /// Once.
    Global,
}

type CheckFn = Arc<dyn Fn(&Vector, &Vector) -> Result<f64> + Send + Sync>;

/// A named precondition; its check returns a margin that must be `>= 0`.
#[derive(Clone)]
pub struct Hypothesis {
    pub name: String,
    pub domain: HypothesisDomain,
    check: CheckFn,
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hypothesis({}, {:?})", self.name, self.domain)
    }
}

impl Hypothesis {
    pub fn interior(name: &str, check: impl Fn(&Vector) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self { name: name.into(), domain: HypothesisDomain::Interior, check: Arc::new(move |x, _| check(x)) }
    }

    pub fn boundary(name: &str, check: impl Fn(&Vector, &Vector) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self { name: name.into(), domain: HypothesisDomain::Boundary, check: Arc::new(check) }
    }

    pub fn global(name: &str, margin: f64) -> Self {
        Self { name: name.into(), domain: HypothesisDomain::Global, check: Arc::new(move |_, _| Ok(margin)) }
    }

    pub fn global_with(name: &str, check: impl Fn() -> Result<f64> + Send + Sync + 'static) -> Self {
        Self { name: name.into(), domain: HypothesisDomain::Global, check: Arc::new(move |_, _| check()) }
    }

    pub fn margin_at(&self, x: &Vector, n: &Vector) -> f64 {
        match (self.check)(x, n) {
            Ok(m) if !m.is_nan() => m,
            _ => f64::NEG_INFINITY,
        }
    }
}

/// One inequality with every ingredient needed to evaluate both sides.
#[derive(Clone)]
pub struct InequalityInstance {
    pub id: String,
    pub dim: usize,
    pub measure: Arc<Measure>,
    pub lhs_kind: LhsKind,
    pub lhs_scale: f64,
    pub rhs_weight: QuadraticFormField,
    pub rhs_constant: f64,
    pub extras: Vec<ExtraTerm>,
    pub boundary: Option<BoundaryTerm>,
    pub constant_known: bool,
    pub function_class: FunctionClass,
    pub probe: ProbeMode,
    /// Skip sample points within the gauge margin of the origin.
    pub singular_at_origin: bool,
    pub hypotheses: Vec<Hypothesis>,
    /// Worst margins on the hypothesis grid, filled by [`instantiate`].
    pub margins: Vec<HypothesisMargin>,
    pub notes: Vec<String>,
}

impl fmt::Debug for InequalityInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InequalityInstance")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("measure", &self.measure.spec)
            .field("lhs_kind", &self.lhs_kind)
            .field("lhs_scale", &self.lhs_scale)
            .field("rhs_weight", &self.rhs_weight)
            .field("rhs_constant", &self.rhs_constant)
            .field("extras", &self.extras)
            .field("boundary", &self.boundary)
            .field("constant_known", &self.constant_known)
            .finish()
    }
}

impl InequalityInstance {
    /// Variance against zero weight with constant 1; builders fill in the rest.
    pub fn new(id: &str, measure: Arc<Measure>) -> Self {
        let dim = measure.dim;
        Self {
            id: id.into(),
            dim,
            measure,
            lhs_kind: LhsKind::Variance,
            lhs_scale: 1.0,
            rhs_weight: QuadraticFormField::Zero { dim },
            rhs_constant: 1.0,
            extras: vec![],
            boundary: None,
            constant_known: true,
            function_class: FunctionClass::Standard,
            probe: ProbeMode::None,
            singular_at_origin: false,
            hypotheses: vec![],
            margins: vec![],
            notes: vec![],
        }
    }

    /// The body whose boundary the boundary hypotheses refer to.
    pub fn boundary_body(&self) -> Option<&ConvexBody> {
        self.boundary.as_ref().map(|b| &b.body).or(self.measure.body())
    }

    fn needs_boundary_grid(&self) -> bool {
        self.hypotheses.iter().any(|h| h.domain == HypothesisDomain::Boundary)
    }
}

/// The dimension parameter `N`: a number or `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DimensionParam {
    Number(f64),
    Text(String),
}

impl DimensionParam {
    pub fn value(&self) -> Result<f64> {
        match self {
            DimensionParam::Number(v) => Ok(*v),
            DimensionParam::Text(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
            DimensionParam::Text(s) => Err(Error::InvalidParameter { name: "n".into(), reason: format!("expected a number or \"inf\", got '{s}'") }),
        }
    }
}

/// Metric used by the generalized Brascamp-Lieb instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean,
    /// `sum x_i^{-2p} dx_i^2`.
    ProductPower { p: f64 },
    /// `sum exp(-2 lambda x_i) dx_i^2`.
    ProductExp { lambda: f64 },
}

/// Instance parameters; which ones apply depends on the id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<DimensionParam>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name: name.into(), reason: reason.into() }
}

impl Params {
    /// The measure: explicit spec, else uniform on `body`, else `default`.
    pub(crate) fn measure_or(&self, dim: usize, default: MeasureSpec) -> Result<Arc<Measure>> {
        let spec = match (&self.measure, &self.body) {
            (Some(m), _) => m.clone(),
            (None, Some(b)) => MeasureSpec::Uniform { body: b.clone() },
            (None, None) => default,
        };
        Ok(Arc::new(Measure::new(&spec, dim)?))
    }

    /// The body: explicit spec, else the body of the measure.
    pub(crate) fn body_for(&self, measure: &Measure) -> Result<ConvexBody> {
        match (&self.body, measure.body()) {
            (Some(b), _) => b.body(measure.dim),
            (None, Some(b)) => Ok(b.clone()),
            (None, None) => Err(invalid("body", "this inequality needs a convex body")),
        }
    }

    pub(crate) fn form_or(&self, allowed: &[&str]) -> Result<String> {
        match &self.form {
            None => Ok(allowed[0].to_string()),
            Some(f) if allowed.contains(&f.as_str()) => Ok(f.clone()),
            Some(f) => Err(invalid("form", format!("'{f}' is not one of {allowed:?}"))),
        }
    }

    pub(crate) fn positive(&self, name: &str, value: Option<f64>, default: Option<f64>) -> Result<f64> {
        match value.or(default) {
            Some(v) if v > 0.0 && v.is_finite() => Ok(v),
            Some(v) => Err(invalid(name, format!("must be positive and finite, got {v}"))),
            None => Err(invalid(name, "is required")),
        }
    }

    /// Rejects a measure spec for ids whose measure is determined by scalars.
    pub(crate) fn no_measure(&self, id: &str) -> Result<()> {
        if self.measure.is_some() || self.body.is_some() {
            return Err(invalid("measure", format!("{id} builds its own measure from its scalar parameters")));
        }
        Ok(())
    }
}

/// Every catalog id, in manifest order.
pub const IDS: [&str; 22] = [
    "classical_bl",
    "generalized_bl",
    "refined_bl",
    "negdim_bl",
    "compact_bl",
    "payne_weinberger",
    "bakry_emery_lsi",
    "entropic_bl",
    "muq_lsi",
    "bakry_t_lsi",
    "qgt2_lsi",
    "poly_product",
    "exp_product",
    "klartag_transfer",
    "cone_variance",
    "l1_type",
    "dim_bl_boundary",
    "hardy_boundary",
    "hardy_dirichlet",
    "hardy_n0",
    "strong_boundary",
    "one_lip_reduction",
];

pub fn is_known_id(id: &str) -> bool {
    IDS.contains(&id)
}

/// Builds the instance without checking hypotheses.
pub fn build(id: &str, dim: usize, params: &Params) -> Result<InequalityInstance> {
    if dim == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }
    match id {
        "classical_bl" => euclidean::classical_bl(dim, params),
        "generalized_bl" => euclidean::generalized_bl(dim, params),
        "refined_bl" => euclidean::refined_bl(dim, params),
        "negdim_bl" => euclidean::negdim_bl(dim, params),
        "compact_bl" => euclidean::compact_bl(dim, params),
        "payne_weinberger" => euclidean::payne_weinberger(dim, params),
        "bakry_emery_lsi" => euclidean::bakry_emery_lsi(dim, params),
        "entropic_bl" => entropic::entropic_bl(dim, params),
        "muq_lsi" => entropic::muq_lsi(dim, params),
        "bakry_t_lsi" => entropic::bakry_t_lsi(dim, params),
        "qgt2_lsi" => entropic::qgt2_lsi(dim, params),
        "poly_product" => product::poly_product(dim, params),
        "exp_product" => product::exp_product(dim, params),
        "klartag_transfer" => product::klartag_transfer(dim, params),
        "cone_variance" => product::cone_variance(dim, params),
        "l1_type" => product::l1_type(dim, params),
        "one_lip_reduction" => product::one_lip_reduction(dim, params),
        "dim_bl_boundary" => boundary::dim_bl_boundary(dim, params),
        "hardy_boundary" => boundary::hardy_boundary(dim, params),
        "hardy_dirichlet" => boundary::hardy_dirichlet(dim, params),
        "hardy_n0" => boundary::hardy_n0(dim, params),
        "strong_boundary" => boundary::strong_boundary(dim, params),
        other => Err(Error::UnknownId(other.to_string())),
    }
}

/// Interior and boundary hypothesis grids of an instance.
pub fn hypothesis_grid(instance: &InequalityInstance) -> Result<(Vec<Vector>, Vec<Vector>)> {
    let label = format!("hypothesis/{}/{}", instance.id, instance.dim);
    let interior = instance.measure.sample(HYPOTHESIS_GRID, HYPOTHESIS_SEED, &label)?.points;
    let boundary = match instance.boundary_body() {
        Some(body) if instance.needs_boundary_grid() => cone_boundary_sample(body, HYPOTHESIS_GRID / 4, HYPOTHESIS_SEED, &format!("{label}/boundary"))?.points,
        _ => vec![],
    };
    Ok((interior, boundary))
}

/// Worst margin of every hypothesis over the given grids.
pub fn hypothesis_margins(instance: &InequalityInstance, interior: &[Vector], boundary: &[Vector]) -> Vec<HypothesisMargin> {
    let empty = Vector::zeros(0);
    let body = instance.boundary_body();
    let projected: Vec<Option<(Vector, Vector)>> = boundary
        .par_iter()
        .map(|x| {
            let body = body?;
            let (p, n) = body.gauge_and_normal(x).ok()?;
            (p > 0.0).then(|| (x / p, n))
        })
        .collect();
    instance
        .hypotheses
        .iter()
        .map(|h| {
            let (margin, location) = match h.domain {
                HypothesisDomain::Global => (h.margin_at(&empty, &empty), vec![]),
                HypothesisDomain::Interior => {
                    let m: Vec<f64> = interior.par_iter().map(|x| h.margin_at(x, &empty)).collect();
                    worst(&m, |i| interior[i].iter().copied().collect())
                }
                HypothesisDomain::Boundary => {
                    let m: Vec<f64> = projected.par_iter().map(|p| p.as_ref().map_or(f64::INFINITY, |(y, n)| h.margin_at(y, n))).collect();
                    worst(&m, |i| projected[i].as_ref().map_or(vec![], |(y, _)| y.iter().copied().collect()))
                }
            };
            HypothesisMargin { name: h.name.clone(), margin, location, passed: margin >= -HYPOTHESIS_SLACK }
        })
        .collect()
}

fn worst(margins: &[f64], location: impl Fn(usize) -> Vec<f64>) -> (f64, Vec<f64>) {
    let mut best = (f64::INFINITY, None);
    for (i, &m) in margins.iter().enumerate() {
        if m < best.0 {
            best = (m, Some(i));
        }
    }
    (best.0, best.1.map_or(vec![], location))
}

/// Builds the instance and checks its hypotheses on the fixed grid.
pub fn instantiate(id: &str, dim: usize, params: &Params) -> Result<InequalityInstance> {
    let mut instance = build(id, dim, params)?;
    let (interior, boundary) = hypothesis_grid(&instance)?;
    instance.margins = hypothesis_margins(&instance, &interior, &boundary);
    if let Some(bad) = instance.margins.iter().find(|m| !m.passed) {
        return Err(Error::HypothesisViolated { name: bad.name.clone(), location: bad.location.clone(), margin: bad.margin });
    }
    Ok(instance)
}

// ---------------------------------------------------------------------------
// Shared checks

/// Smallest eigenvalue of `D^2 V`.
pub(crate) fn hessian_floor(v: Arc<dyn PotentialField>) -> impl Fn(&Vector) -> Result<f64> + Send + Sync + 'static {
    move |x| Ok(min_eigenvalue(&v.hessian(x)))
}

/// `min_i V_i - lambda`.
pub(crate) fn gradient_floor(v: Arc<dyn PotentialField>, lambda: f64) -> impl Fn(&Vector) -> Result<f64> + Send + Sync + 'static {
    move |x| Ok(v.gradient(x).iter().fold(f64::INFINITY, |a, &g| a.min(g - lambda)))
}

/// Margin of "the support lies in the closed positive orthant".
pub(crate) fn orthant_margin(measure: &Measure) -> f64 {
    measure.coordinate_bounds().0
}

pub(crate) fn flag(ok: bool) -> f64 {
    if ok {
        1.0
    } else {
        -1.0
    }
}
