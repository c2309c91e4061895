//! Experiment configuration documents and their validation.

use std::path::PathBuf;

use riccikit::inequality_catalog::{catalog, is_known_id, Params};
use riccikit::tolerances::MIN_SAMPLES;
use riccikit::verification_engine::measures::{BodySpec, MeasureSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

/// Where a suite writes its report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

/// One inequality run over a list of dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    /// Suite label of the rows; the suite name or the id when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Suite functions to keep, by id; all of them when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<String>,
    /// Catalog parameters other than the measure and body.
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputPaths>,
}

impl ExperimentConfig {
    /// Catalog parameters with the top-level measure and body folded in.
    pub fn catalog_params(&self) -> Params {
        let mut p = self.params.clone();
        p.measure = self.measure.clone();
        p.body = self.body.clone();
        p
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteDocument {
    #[serde(default)]
    suite: Option<String>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output: Option<OutputPaths>,
    experiments: Vec<ExperimentConfig>,
}

/// A validated configuration: one or more experiments sharing a suite name.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub name: String,
    pub experiments: Vec<ExperimentConfig>,
    pub output: OutputPaths,
}

/// JSON pointer of a serde path.
fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let p = pointer(e.path());
        let p = if p == "/?" { String::new() } else { p };
        CliError::schema(format!("{prefix}{p}"), e.inner().to_string())
    })
}

/// Parses and validates a configuration document.
///
/// A document is either a single experiment or an object with an
/// `experiments` array plus suite-wide defaults.
pub fn parse_config(document: &str) -> Result<SuiteConfig> {
    let value: Value = serde_json::from_str(document).map_err(|e| CliError::schema("", format!("not valid JSON: {e}")))?;
    if !value.is_object() {
        return Err(CliError::schema("", "expected a JSON object"));
    }
    let (config, prefix) = if value.get("experiments").is_some() {
        let doc: SuiteDocument = typed(value, "")?;
        let name = doc.suite.unwrap_or_else(|| "suite".into());
        let experiments = doc
            .experiments
            .into_iter()
            .map(|mut e| {
                e.samples = e.samples.or(doc.samples);
                e.seed = e.seed.or(doc.seed);
                e
            })
            .collect();
        (SuiteConfig { name, experiments, output: doc.output.unwrap_or_default() }, "/experiments/")
    } else {
        let e: ExperimentConfig = typed(value, "")?;
        let name = e.name.clone().unwrap_or_else(|| e.id.clone());
        let output = e.output.clone().unwrap_or_default();
        (SuiteConfig { name, experiments: vec![e], output }, "")
    };
    if config.experiments.is_empty() {
        return Err(CliError::schema("/experiments", "needs at least one experiment"));
    }
    for (i, e) in config.experiments.iter().enumerate() {
        let base = if prefix.is_empty() { String::new() } else { format!("{prefix}{i}") };
        validate_experiment(e, &base)?;
    }
    Ok(config)
}

fn validate_experiment(e: &ExperimentConfig, base: &str) -> Result<()> {
    if !is_known_id(&e.id) {
        return Err(CliError::UnknownInequalityId { id: e.id.clone(), pointer: format!("{base}/id") });
    }
    if e.dims.is_empty() {
        return Err(CliError::schema(format!("{base}/dims"), "needs at least one dimension"));
    }
    let entry = catalog().iter().find(|c| c.id == e.id).expect("catalog covers every id");
    for (k, &d) in e.dims.iter().enumerate() {
        if d < entry.min_dim {
            return Err(CliError::schema(format!("{base}/dims/{k}"), format!("{} requires d >= {} (got {d})", e.id, entry.min_dim)));
        }
    }
    if let Some(n) = e.samples {
        if n < MIN_SAMPLES {
            return Err(CliError::schema(format!("{base}/samples"), format!("needs at least {MIN_SAMPLES} samples")));
        }
    }
    if e.params.measure.is_some() {
        return Err(CliError::schema(format!("{base}/params/measure"), "give the measure at the experiment level"));
    }
    if e.params.body.is_some() {
        return Err(CliError::schema(format!("{base}/params/body"), "give the body at the experiment level"));
    }
    Ok(())
}

/// Reads a configuration from a file, or from a bundled suite by name.
pub fn load_config(path: &str) -> Result<SuiteConfig> {
    if let Some(text) = crate::bundled(path) {
        if !std::path::Path::new(path).exists() {
            return parse_config(text);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

/// Parses a document into `T`, reporting the first violation with its pointer.
pub fn typed_document<T: DeserializeOwned>(document: &str) -> Result<T> {
    let value: Value = serde_json::from_str(document).map_err(|e| CliError::schema("", format!("not valid JSON: {e}")))?;
    typed(value, "")
}
