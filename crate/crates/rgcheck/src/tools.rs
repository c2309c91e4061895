//! Jobs of the `ricci`, `spectrum` and `transport` subcommands.

use std::sync::Arc;

use riccikit::fields::{Euclidean, Matrix, MetricField, PotentialField, Vector, ZeroPotential};
use riccikit::inequality_catalog::DimensionParam;
use riccikit::linalg::min_eigenvalue;
use riccikit::metric_families::{conformal_ricci_n, default_radial_eps, product_ricci, ConformalMetricData, HessianMetric, ProductMetricData, ProductProfile};
use riccikit::tensor_core::generalized_ricci;
use riccikit::transport_legendre::{monge_ampere_residual, monotone_map_1d, Density1D, TransportPotential1D};
use riccikit::verification_engine::measures::{Measure, MeasureSpec, ProfileSpec};
use riccikit::verification_engine::{spectral_gap_1d, SpectralGap};
use serde::{Deserialize, Serialize};

use crate::config::typed_document;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricChoice {
    Euclidean,
    /// `D^2 Phi` with `Phi` the potential of a measure.
    Hessian { phi: MeasureSpec },
    ProductPower { p: f64 },
    ProductExp { lambda: f64 },
    ConformalRadial {
        theta: f64,
        #[serde(default)]
        eps: Option<f64>,
    },
}

/// Curvature of `(R^d, g, exp(-V) dx)` at a list of points.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicciJob {
    pub metric: MetricChoice,
    /// Reference measure `exp(-V) dx`; Lebesgue when absent.
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    pub dim: usize,
    #[serde(default)]
    pub n: Option<DimensionParam>,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciPoint {
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ric_g: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ric_gmu: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ric_gmu_n: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
    /// Closed form of the family, where one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn potential(spec: &MeasureSpec, dim: usize) -> Result<Arc<dyn PotentialField>> {
    Ok(Measure::new(spec, dim)?.potential().clone())
}

pub fn parse_ricci(document: &str) -> Result<RicciJob> {
    typed_document(document)
}

pub fn run_ricci(job: &RicciJob) -> Result<Vec<RicciPoint>> {
    let d = job.dim;
    let v: Arc<dyn PotentialField> = match &job.measure {
        Some(spec) => potential(spec, d)?,
        None => Arc::new(ZeroPotential(d)),
    };
    let n = match &job.n {
        Some(n) => n.value()?,
        None => f64::INFINITY,
    };
    enum Closed {
        None,
        Euclidean,
        Product(ProductMetricData),
        Conformal(ConformalMetricData),
    }
    let (metric, closed): (Box<dyn MetricField>, Closed) = match &job.metric {
        MetricChoice::Euclidean => (Box::new(Euclidean(d)), Closed::Euclidean),
        MetricChoice::Hessian { phi } => (Box::new(HessianMetric(potential(phi, d)?)), Closed::None),
        MetricChoice::ProductPower { p } => {
            let data = ProductMetricData::uniform(d, ProductProfile::Power { p: *p });
            (Box::new(data.clone()), Closed::Product(data))
        }
        MetricChoice::ProductExp { lambda } => {
            let data = ProductMetricData::uniform(d, ProductProfile::Exp { lambda: *lambda });
            (Box::new(data.clone()), Closed::Product(data))
        }
        MetricChoice::ConformalRadial { theta, eps } => {
            let data = ConformalMetricData::radial(d, *theta, eps.unwrap_or_else(|| default_radial_eps(1.0)));
            (Box::new(data.metric()), Closed::Conformal(data))
        }
    };
    let eval = |x: &Vector| -> riccikit::Result<RicciPoint> {
        let c = generalized_ricci(metric.as_ref(), v.as_ref(), x, n)?;
        let closed = match &closed {
            Closed::None => None,
            Closed::Euclidean if n.is_infinite() => Some((v.hessian(x), &c.ric_gmu)),
            Closed::Product(data) if n.is_infinite() => Some((product_ricci(data, v.as_ref(), x)?, &c.ric_gmu)),
            Closed::Conformal(data) => Some((conformal_ricci_n(data, v.as_ref(), n, x)?, &c.ric_gmu_n)),
            _ => None,
        };
        Ok(RicciPoint {
            x: x.iter().copied().collect(),
            ric_g: Some(rows(&c.ric_g)),
            ric_gmu: Some(rows(&c.ric_gmu)),
            ric_gmu_n: Some(rows(&c.ric_gmu_n)),
            min_eigenvalue: Some(min_eigenvalue(&c.ric_gmu_n)),
            closed_form_error: closed.as_ref().map(|(m, fd)| (m - *fd).amax()),
            closed_form: closed.map(|(m, _)| rows(&m)),
            error: None,
        })
    };
    Ok(job
        .points
        .iter()
        .map(|p| {
            let failed = |msg: String| RicciPoint {
                x: p.clone(),
                ric_g: None,
                ric_gmu: None,
                ric_gmu_n: None,
                min_eigenvalue: None,
                closed_form: None,
                closed_form_error: None,
                error: Some(msg),
            };
            if p.len() != d {
                return failed(format!("point has {} coordinates, expected {d}", p.len()));
            }
            eval(&Vector::from_vec(p.clone())).unwrap_or_else(|e| failed(e.to_string()))
        })
        .collect())
}

/// Spectral gap of `exp(-V)` on an interval.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumJob {
    pub profile: ProfileSpec,
    pub interval: [f64; 2],
    #[serde(default = "default_cells")]
    pub cells: usize,
}

fn default_cells() -> usize {
    2000
}

pub fn parse_spectrum(document: &str) -> Result<SpectrumJob> {
    typed_document(document)
}

pub fn run_spectrum(job: &SpectrumJob) -> Result<SpectralGap> {
    Ok(spectral_gap_1d(job.profile.profile().as_ref(), (job.interval[0], job.interval[1]), job.cells)?)
}

/// Monotone map between two one-dimensional product laws.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportJob {
    pub source: MeasureSpec,
    pub target: MeasureSpec,
    pub points: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportPoint {
    pub x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivative: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monge_ampere_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn parse_transport(document: &str) -> Result<TransportJob> {
    typed_document(document)
}

fn law(spec: &MeasureSpec, name: &str) -> Result<Density1D> {
    let m = Measure::new(spec, 1)?;
    m.coordinate_density().cloned().ok_or_else(|| {
        riccikit::Error::InvalidParameter { name: name.into(), reason: "must be a one-dimensional product measure".into() }.into()
    })
}

pub fn run_transport(job: &TransportJob) -> Result<Vec<TransportPoint>> {
    let mu = law(&job.source, "source")?;
    let nu = law(&job.target, "target")?;
    let phi = TransportPotential1D { mu: mu.clone(), nu: nu.clone(), anchor: mu.mean() };
    Ok(job
        .points
        .iter()
        .map(|&x| {
            let at = || -> riccikit::Result<TransportPoint> {
                let (t, dt) = monotone_map_1d(&mu, &nu, x)?;
                let r = monge_ampere_residual(&phi, &mu, &nu, &Vector::from_element(1, x))?;
                Ok(TransportPoint { x, map: Some(t), derivative: Some(dt), monge_ampere_residual: Some(r), error: None })
            };
            at().unwrap_or_else(|e| TransportPoint { x, map: None, derivative: None, monge_ampere_residual: None, error: Some(e.to_string()) })
        })
        .collect())
}
