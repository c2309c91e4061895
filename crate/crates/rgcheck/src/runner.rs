//! Runs validated suites through the verification engine.

use riccikit::inequality_catalog::{build, hypothesis_grid, hypothesis_margins, InequalityInstance};
use riccikit::tolerances::DEFAULT_SAMPLES;
use riccikit::verification_engine::{check_inequality, default_suite, functions, HypothesisAttachment, ReportRow, VerificationReport};
use riccikit::Error;

use crate::config::{ExperimentConfig, SuiteConfig};
use crate::error::{CliError, Result};

/// Command-line overrides of the configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    /// Worker threads; the global pool when `None`.
    pub workers: Option<usize>,
}

/// Seed used when neither the command line nor the configuration sets one.
pub const DEFAULT_SEED: u64 = 0;

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| CliError::Engine(Error::InvalidParameter { name: "workers".into(), reason: e.to_string() }))?;
            Ok(pool.install(f))
        }
    }
}

/// Every experiment of the suite in order. Errors of a single instance
/// become `error` rows; the rest of the suite still runs.
pub fn run_suite(config: &SuiteConfig, opts: &RunOptions) -> Result<VerificationReport> {
    with_workers(opts.workers, || {
        let mut report = VerificationReport::default();
        for e in &config.experiments {
            let label = e.name.clone().unwrap_or_else(|| config.name.clone());
            for &dim in &e.dims {
                report.extend(run_one(e, &label, dim, opts));
            }
        }
        report
    })
}

fn run_one(e: &ExperimentConfig, suite: &str, dim: usize, opts: &RunOptions) -> VerificationReport {
    let seed = opts.seed.or(e.seed).unwrap_or(DEFAULT_SEED);
    let n = opts.samples.or(e.samples).unwrap_or(DEFAULT_SAMPLES);
    let mut report = VerificationReport::default();
    let error_row = |err: &dyn std::fmt::Display| ReportRow::error(suite, &e.id, dim, "-", seed, n, err);
    let instance = match checked_instance(e, dim) {
        Ok((inst, attachment)) => {
            report.hypotheses.push(HypothesisAttachment { suite: suite.into(), ..attachment });
            match inst {
                Ok(inst) => inst,
                Err(err) => {
                    report.rows.push(error_row(&err));
                    return report;
                }
            }
        }
        Err(err) => {
            report.rows.push(error_row(&err));
            return report;
        }
    };
    let rows = default_suite(&instance, seed)
        .and_then(|suite| functions::select(suite, &e.functions))
        .and_then(|fs| check_inequality(&instance, Some(fs), n, seed));
    match rows {
        Ok(rows) => report.rows.extend(rows.into_iter().map(|r| ReportRow { suite: suite.into(), ..r })),
        Err(err) => report.rows.push(error_row(&err)),
    }
    report
}

type Checked = (std::result::Result<InequalityInstance, Error>, HypothesisAttachment);

/// Builds the instance and evaluates its hypotheses, keeping the margins
/// even when one of them is violated.
fn checked_instance(e: &ExperimentConfig, dim: usize) -> std::result::Result<Checked, Error> {
    let mut inst = build(&e.id, dim, &e.catalog_params())?;
    let (interior, boundary) = hypothesis_grid(&inst)?;
    inst.margins = hypothesis_margins(&inst, &interior, &boundary);
    let attachment = HypothesisAttachment { suite: String::new(), inequality: e.id.clone(), dim, margins: inst.margins.clone() };
    let result = match inst.margins.iter().find(|m| !m.passed) {
        Some(bad) => Err(Error::HypothesisViolated { name: bad.name.clone(), location: bad.location.clone(), margin: bad.margin }),
        None => Ok(inst),
    };
    Ok((result, attachment))
}

/// 1 if any row fails, else 3 if any row errored, else 0.
pub fn exit_status(report: &VerificationReport) -> i32 {
    if report.any_failed() {
        1
    } else if report.any_error() {
        3
    } else {
        0
    }
}
