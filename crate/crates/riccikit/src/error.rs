use thiserror::Error;

/// Every failure the numerical layers can report.
///
/// Variants carry enough context (point, margin, name) for a report row to
/// explain itself without a backtrace.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("metric is not positive definite at {point:?} (min eigenvalue {min_eigenvalue:e})")]
    NonPositiveDefiniteMetric { point: Vec<f64>, min_eigenvalue: f64 },

    #[error("stencil of width {step:e} leaves the domain at {point:?}")]
    StepTooLarge { point: Vec<f64>, step: f64 },

    #[error("dimension parameter N = {n} lies in the forbidden range [1, {dim})")]
    InvalidDimensionParameter { n: f64, dim: usize },

    #[error("third derivatives of the potential are required (condition number {condition:e})")]
    MissingThirdDerivatives { condition: f64 },

    #[error("product profile is not positive at coordinate {coordinate} (value {value:e})")]
    ProfileNotPositive { coordinate: usize, value: f64 },

    #[error("degenerate Hessian at {point:?}")]
    DegenerateHessian { point: Vec<f64> },

    #[error("normal vector has length {norm}, expected 1")]
    NonUnitNormal { norm: f64 },

    #[error("CDF inversion failed at level {level}: {reason}")]
    CdfInversionFailure { level: f64, reason: String },

    #[error("potential is not strongly convex at {x} (second derivative {second:e})")]
    NotStronglyConvex { x: f64, second: f64 },

    #[error("target measure must have compact support")]
    NonCompactTarget,

    #[error("target barycenter {barycenter:e} is not at the origin")]
    BarycenterNotZero { barycenter: f64 },

    #[error("fixed-point iteration stalled after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("gauge is undefined at the origin")]
    UndefinedAtOrigin,

    #[error("boundary point {point:?} is not smooth (edge or corner)")]
    NonSmoothBoundaryPoint { point: Vec<f64> },

    #[error("rejection sampler exceeded its budget of {budget} proposals")]
    RejectionBudgetExceeded { budget: usize },

    #[error("non-positive angle <x,n> = {value:e} at {point:?}")]
    NonPositiveAngle { point: Vec<f64>, value: f64 },

    #[error("hypothesis '{name}' violated at {location:?} (margin {margin:e})")]
    HypothesisViolated { name: String, location: Vec<f64>, margin: f64 },

    #[error("unknown inequality id '{0}'")]
    UnknownId(String),

    #[error("invalid parameter '{name}': {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("sample of size {n} is too small (need at least {min})")]
    DegenerateSample { n: usize, min: usize },

    #[error("boundary quadrature failed: {0}")]
    BoundaryQuadratureFailure(String),

    #[error("measure is not normalizable: {0}")]
    NonNormalizable(String),

    #[error("eigensolver failed: {0}")]
    EigensolveFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
