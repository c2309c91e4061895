//! Batch front-end for the verification engine: configuration parsing,
//! suite execution and report export.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod tools;

pub use config::{load_config, parse_config, ExperimentConfig, OutputPaths, SuiteConfig};
pub use error::{CliError, Result};
pub use report::{emit_report, Format};
pub use runner::{exit_status, run_suite, RunOptions};

/// Suites shipped with the binary, addressable by name.
pub const BUNDLED: [(&str, &str); 2] = [
    ("smoke", include_str!("../configs/smoke.json")),
    ("bakry-literal", include_str!("../configs/bakry-literal.json")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
