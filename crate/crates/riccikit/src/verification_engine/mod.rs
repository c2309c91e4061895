//! Monte Carlo evaluation of both sides of an inequality instance, exact
//! one-dimensional spectral gaps, and pointwise PSD checks.

pub mod functions;
pub mod measures;
pub mod spectral;
pub mod stats;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fields::{Matrix, Vector};
use crate::inequality_catalog::{InequalityInstance, ProbeMode};
use crate::linalg::min_eigenvalue;
use crate::tolerances::{REL_TOL, SIGMA_MULTIPLIER};

pub use functions::{suite_for, Bubble, FunctionClass, Polynomial, TestFunction};
pub use measures::{cone_boundary_sample, sample_measure, BodySpec, Measure, MeasureSpec, ProfileSpec, SampleSet};
pub use spectral::{spectral_gap_1d, SpectralGap};
pub use stats::{Estimate, Evaluation};

type ScalarOf = Arc<dyn Fn(&Vector) -> Result<f64> + Send + Sync>;
type DiagonalOf = Arc<dyn Fn(&Vector) -> Result<Vector> + Send + Sync>;
type MatrixOf = Arc<dyn Fn(&Vector) -> Result<Matrix> + Send + Sync>;

/// A field of quadratic forms `x -> W(x)`.
#[derive(Clone)]
pub enum QuadraticFormField {
    Zero { dim: usize },
    /// `s(x) Id`.
    Scalar { dim: usize, scale: ScalarOf },
    Diagonal { dim: usize, diagonal: DiagonalOf },
    Full { dim: usize, matrix: MatrixOf },
}

impl fmt::Debug for QuadraticFormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            QuadraticFormField::Zero { .. } => "zero",
            QuadraticFormField::Scalar { .. } => "scalar",
            QuadraticFormField::Diagonal { .. } => "diagonal",
            QuadraticFormField::Full { .. } => "full",
        };
        write!(f, "QuadraticFormField::{kind}(dim {})", self.dim())
    }
}

/// A quadratic form evaluated at one point.
#[derive(Debug, Clone, PartialEq)]
pub enum FormAt {
    Zero,
    Scalar(f64),
    Diagonal(Vector),
    Full(Matrix),
}

impl FormAt {
    /// `<W v, v>`.
    pub fn form(&self, v: &Vector) -> f64 {
        match self {
            FormAt::Zero => 0.0,
            FormAt::Scalar(s) => s * v.norm_squared(),
            FormAt::Diagonal(w) => w.iter().zip(v.iter()).map(|(a, b)| a * b * b).sum(),
            FormAt::Full(m) => v.dot(&(m * v)),
        }
    }

    pub fn matrix(&self, dim: usize) -> Matrix {
        match self {
            FormAt::Zero => Matrix::zeros(dim, dim),
            FormAt::Scalar(s) => Matrix::identity(dim, dim) * *s,
            FormAt::Diagonal(w) => Matrix::from_diagonal(w),
            FormAt::Full(m) => m.clone(),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            FormAt::Zero => 0.0,
            FormAt::Scalar(s) => *s,
            FormAt::Diagonal(w) => w.min(),
            FormAt::Full(m) => min_eigenvalue(m),
        }
    }
}

impl QuadraticFormField {
    pub fn constant_identity(dim: usize, scale: f64) -> Self {
        QuadraticFormField::Scalar { dim, scale: Arc::new(move |_| Ok(scale)) }
    }

    pub fn scalar(dim: usize, scale: impl Fn(&Vector) -> Result<f64> + Send + Sync + 'static) -> Self {
        QuadraticFormField::Scalar { dim, scale: Arc::new(scale) }
    }

    pub fn diagonal(dim: usize, diagonal: impl Fn(&Vector) -> Result<Vector> + Send + Sync + 'static) -> Self {
        QuadraticFormField::Diagonal { dim, diagonal: Arc::new(diagonal) }
    }

    pub fn full(dim: usize, matrix: impl Fn(&Vector) -> Result<Matrix> + Send + Sync + 'static) -> Self {
        QuadraticFormField::Full { dim, matrix: Arc::new(matrix) }
    }

    pub fn dim(&self) -> usize {
        match self {
            QuadraticFormField::Zero { dim }
            | QuadraticFormField::Scalar { dim, .. }
            | QuadraticFormField::Diagonal { dim, .. }
            | QuadraticFormField::Full { dim, .. } => *dim,
        }
    }

    pub fn at(&self, x: &Vector) -> Result<FormAt> {
        Ok(match self {
            QuadraticFormField::Zero { .. } => FormAt::Zero,
            QuadraticFormField::Scalar { scale, .. } => FormAt::Scalar(scale(x)?),
            QuadraticFormField::Diagonal { diagonal, .. } => FormAt::Diagonal(diagonal(x)?),
            QuadraticFormField::Full { matrix, .. } => FormAt::Full(matrix(x)?),
        })
    }

    pub fn form(&self, x: &Vector, v: &Vector) -> Result<f64> {
        Ok(self.at(x)?.form(v))
    }

    pub fn matrix(&self, x: &Vector) -> Result<Matrix> {
        Ok(self.at(x)?.matrix(self.dim()))
    }
}

/// Smallest eigenvalue of `field` over `points` and where it occurs.
/// Points where the field cannot be evaluated count as `-inf`.
pub fn psd_verify(field: &QuadraticFormField, points: &[Vector]) -> (f64, Vector) {
    let mut worst = (f64::INFINITY, Vector::zeros(field.dim()));
    for x in points {
        let m = field.at(x).map(|w| w.min_eigenvalue()).unwrap_or(f64::NEG_INFINITY);
        let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
        if m < worst.0 {
            worst = (m, x.clone());
        }
    }
    worst
}

/// Worst margin of one named hypothesis over a sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisMargin {
    pub name: String,
    #[serde(with = "finite_or_null")]
    pub margin: f64,
    pub location: Vec<f64>,
    pub passed: bool,
}

/// Outcome of one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    ReportOnly,
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::ReportOnly => "report-only",
            Status::Error => "error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pass" => Ok(Status::Pass),
            "fail" => Ok(Status::Fail),
            "report-only" => Ok(Status::ReportOnly),
            "error" => Ok(Status::Error),
            other => Err(format!("unknown status '{other}'")),
        }
    }
}

/// The slack rule: failure iff `slack < -(3 sigma + rel_tol |rhs|)`.
pub fn slack_status(slack: f64, sigma: f64, rhs: f64, constant_known: bool) -> Status {
    if !constant_known {
        return Status::ReportOnly;
    }
    if !(slack.is_finite() && sigma.is_finite() && rhs.is_finite()) {
        return Status::Error;
    }
    if slack < -(SIGMA_MULTIPLIER * sigma + REL_TOL * rhs.abs()) {
        Status::Fail
    } else {
        Status::Pass
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub suite: String,
    pub inequality: String,
    pub dim: usize,
    pub function: String,
    #[serde(with = "finite_or_null")]
    pub lhs: f64,
    #[serde(with = "finite_or_null")]
    pub lhs_err: f64,
    #[serde(with = "finite_or_null")]
    pub rhs: f64,
    #[serde(with = "finite_or_null")]
    pub rhs_err: f64,
    #[serde(with = "finite_or_null")]
    pub slack: f64,
    pub status: Status,
    pub seed: u64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ReportRow {
    /// A row recording a failure to evaluate.
    pub fn error(suite: &str, inequality: &str, dim: usize, function: &str, seed: u64, n: usize, err: &dyn fmt::Display) -> Self {
        Self {
            suite: suite.into(),
            inequality: inequality.into(),
            dim,
            function: function.into(),
            lhs: f64::NAN,
            lhs_err: f64::NAN,
            rhs: f64::NAN,
            rhs_err: f64::NAN,
            slack: f64::NAN,
            status: Status::Error,
            seed,
            n,
            message: Some(err.to_string()),
        }
    }

    /// `lhs / rhs`.
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Hypothesis margins of one instantiation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisAttachment {
    pub suite: String,
    pub inequality: String,
    pub dim: usize,
    pub margins: Vec<HypothesisMargin>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub rows: Vec<ReportRow>,
    #[serde(default)]
    pub hypotheses: Vec<HypothesisAttachment>,
}

impl VerificationReport {
    pub fn extend(&mut self, other: VerificationReport) {
        self.rows.extend(other.rows);
        self.hypotheses.extend(other.hypotheses);
    }

    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Fail)
    }

    pub fn any_error(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Error)
    }
}

/// Sampling label of a measure in a dimension; instances sharing a measure
/// share their samples.
pub fn measure_label(measure: &Measure) -> String {
    format!("{}/{}", serde_json::to_string(&measure.spec).unwrap_or_default(), measure.dim)
}

/// Interior and boundary samples for an instance.
pub fn draw_samples(instance: &InequalityInstance, n: usize, seed: u64) -> Result<(SampleSet, Option<SampleSet>)> {
    let label = measure_label(&instance.measure);
    let interior = instance.measure.sample(n, seed, &format!("{label}/interior"))?;
    let boundary = match &instance.boundary {
        Some(term) => {
            let body = serde_json::to_string(&term.body).unwrap_or_default();
            Some(cone_boundary_sample(&term.body, n, seed, &format!("{body}/boundary"))?)
        }
        None => None,
    };
    Ok((interior, boundary))
}

/// The default suite for an instance: recentred at the mean of a pilot
/// sample, Lipschitz-normalized or bubbled as the instance requires.
pub fn default_suite(instance: &InequalityInstance, seed: u64) -> Result<Vec<TestFunction>> {
    let pilot = instance.measure.sample(PILOT_SAMPLES, seed, &format!("{}/pilot", measure_label(&instance.measure)))?;
    let d = instance.dim;
    let center = pilot.points.iter().fold(Vector::zeros(d), |a, x| a + x) / pilot.len() as f64;
    let body = instance.boundary.as_ref().map(|b| &b.body).or(instance.measure.body());
    suite_for(instance.function_class, d, &center, &pilot.points, body, seed)
}

/// Pilot sample size used to centre and normalize the suite.
pub const PILOT_SAMPLES: usize = 20_000;

/// Evaluates every function of `functions` on pre-drawn samples.
pub fn evaluate(
    instance: &InequalityInstance,
    functions: &[TestFunction],
    interior: &SampleSet,
    boundary: Option<&SampleSet>,
) -> Result<(Vec<Evaluation>, Option<(Estimate, f64)>)> {
    let acc = stats::accumulate(instance, functions, interior, boundary)?;
    let plans = stats::Plans::new(interior.blocks.len(), boundary.map_or(1, |b| b.blocks.len()), interior.seed, &interior.label);
    let probe = if instance.probe != ProbeMode::None {
        let center = interior.points.iter().fold(Vector::zeros(instance.dim), |a, x| a + x) / interior.len() as f64;
        Some(stats::ProbeSums::collect(interior, &center))
    } else {
        None
    };
    let rows = acc.evaluate(instance, functions, &plans, probe.as_ref());
    let probe_estimate = probe.map(|p| {
        let reps: Vec<f64> = plans.interior.iter().map(|plan| p.lower_bound(plan.iter().copied())).collect();
        (Estimate { value: p.lower_bound(0..p.blocks()), stderr: stats::std_dev(&reps) }, acc.dirichlet_coefficient(instance))
    });
    Ok((rows, probe_estimate))
}

/// `lhs_scale * Var(f)`, `Ent(f^2)`, or `int f^2`, with its bootstrap error.
pub fn estimate_lhs(instance: &InequalityInstance, f: &TestFunction, samples: &SampleSet) -> Result<Estimate> {
    let mut probe_free = instance.clone();
    probe_free.boundary = None;
    probe_free.extras.clear();
    Ok(evaluate(&probe_free, std::slice::from_ref(f), samples, None)?.0[0].lhs)
}

/// Interior energy plus extras plus the boundary term, with its bootstrap error.
pub fn estimate_rhs(instance: &InequalityInstance, f: &TestFunction, samples: &SampleSet, boundary: Option<&SampleSet>) -> Result<Estimate> {
    Ok(evaluate(instance, std::slice::from_ref(f), samples, boundary)?.0[0].rhs)
}

/// Rows for `functions` (the default suite when `None`) at `n` samples.
pub fn check_inequality(instance: &InequalityInstance, functions: Option<Vec<TestFunction>>, n: usize, seed: u64) -> Result<Vec<ReportRow>> {
    let functions = match functions {
        Some(f) => f,
        None => default_suite(instance, seed)?,
    };
    let (interior, boundary) = draw_samples(instance, n, seed)?;
    let (evals, probe) = evaluate(instance, &functions, &interior, boundary.as_ref())?;
    let row = |function: &str, lhs: Estimate, rhs: Estimate, slack: Estimate, known: bool| ReportRow {
        suite: String::new(),
        inequality: instance.id.clone(),
        dim: instance.dim,
        function: function.to_string(),
        lhs: lhs.value,
        lhs_err: lhs.stderr,
        rhs: rhs.value,
        rhs_err: rhs.stderr,
        slack: slack.value,
        status: slack_status(slack.value, slack.stderr, rhs.value, known),
        seed,
        n,
        message: None,
    };
    let mut rows: Vec<ReportRow> = evals.iter().map(|e| row(&e.function, e.lhs, e.rhs, e.slack, instance.constant_known)).collect();
    if let Some((p, coefficient)) = probe {
        // Rayleigh lower bound on C_P against the bound without its numeric constant
        let reference = match instance.probe {
            ProbeMode::AgainstBound => coefficient,
            _ => rows.iter().map(|r| r.lhs).fold(f64::NEG_INFINITY, f64::max),
        };
        let rhs = Estimate { value: reference, stderr: 0.0 };
        rows.push(row("rayleigh_probe", p, rhs, Estimate { value: reference - p.value, stderr: p.stderr }, false));
    }
    Ok(rows)
}

/// `Ent((1 + eps f)^2) / (2 eps^2)` divided by `Var(f)`; tends to 1 as `eps -> 0`.
pub fn linearization_ratio(f: &TestFunction, samples: &SampleSet, eps: f64) -> Result<f64> {
    let n = samples.len();
    if n < crate::tolerances::MIN_SAMPLES {
        return Err(Error::DegenerateSample { n, min: crate::tolerances::MIN_SAMPLES });
    }
    let (mut s1, mut s2, mut g1, mut gl) = (0.0, 0.0, 0.0, 0.0);
    for x in &samples.points {
        let v = f.eval(x);
        s1 += v;
        s2 += v * v;
        let g = (1.0 + eps * v).powi(2);
        g1 += g;
        gl += stats::glogg(g);
    }
    let nf = n as f64;
    let var = stats::unbiased_variance(nf, s1 / nf, s2 / nf) * (nf - 1.0) / nf;
    let ent = stats::plugin_entropy(gl / nf, g1 / nf);
    Ok(ent / (2.0 * eps * eps) / var)
}

/// Serializes non-finite floats as `null` and reads `null` back as NaN.
pub mod finite_or_null {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_examples() {
        let id = QuadraticFormField::constant_identity(2, 1.0);
        let pts = vec![Vector::from_vec(vec![0.1, 0.2]), Vector::from_vec(vec![1.0, -3.0])];
        assert_eq!(psd_verify(&id, &pts).0, 1.0);
        let indefinite = QuadraticFormField::diagonal(2, |_| Ok(Vector::from_vec(vec![1.0, -1.0])));
        assert_eq!(psd_verify(&indefinite, &pts).0, -1.0);
        let full = QuadraticFormField::full(2, |x| Ok(Matrix::from_row_slice(2, 2, &[1.0, x[0], x[0], 1.0])));
        let (m, at) = psd_verify(&full, &pts);
        assert!((m - 0.0).abs() < 1e-12 && at[0] == 1.0);
    }

    #[test]
    fn slack_rule() {
        assert_eq!(slack_status(-0.05, 0.01, 1.0, true), Status::Pass);
        assert_eq!(slack_status(-0.051, 0.01, 1.0, true), Status::Fail);
        assert_eq!(slack_status(-10.0, 0.01, 1.0, false), Status::ReportOnly);
    }

    #[test]
    fn row_json_keeps_non_finite_as_null() {
        let r = ReportRow::error("s", "x", 2, "f", 1, 10, &"boom");
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"lhs\":null") && text.contains("\"status\":\"error\""));
        let back: ReportRow = serde_json::from_str(&text).unwrap();
        assert!(back.lhs.is_nan() && back.status == Status::Error);
        assert_eq!("report-only".parse::<Status>().unwrap(), Status::ReportOnly);
    }
}
