//! CSV and JSON export of verification reports.

use std::io::{Read, Write};
use std::path::Path;

use riccikit::verification_engine::{ReportRow, Status, VerificationReport};

use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 12] = ["suite", "inequality", "dim", "function", "lhs", "lhs_err", "rhs", "rhs_err", "slack", "status", "seed", "n"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// From the file extension; CSV unless it is `.json`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// 17 significant digits, so that every value re-parses exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io("<csv>", io),
        other => CliError::Serialization(format!("{other:?}")),
    }
}

pub fn write_csv<W: Write>(report: &VerificationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in &report.rows {
        w.write_record([
            r.suite.clone(),
            r.inequality.clone(),
            r.dim.to_string(),
            r.function.clone(),
            format_float(r.lhs),
            format_float(r.lhs_err),
            format_float(r.rhs),
            format_float(r.rhs_err),
            format_float(r.slack),
            r.status.as_str().to_string(),
            r.seed.to_string(),
            r.n.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))
}

/// Rows of a CSV report; messages are not part of the CSV and come back empty.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_error)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Serialization(format!("unexpected CSV header {header:?}")));
    }
    let bad = |field: &str, e: &dyn std::fmt::Display| CliError::Serialization(format!("field {field}: {e}"));
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_error)?;
        let float = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(CSV_HEADER[i], &e));
        rows.push(ReportRow {
            suite: rec[0].to_string(),
            inequality: rec[1].to_string(),
            dim: rec[2].parse().map_err(|e| bad("dim", &e))?,
            function: rec[3].to_string(),
            lhs: float(4)?,
            lhs_err: float(5)?,
            rhs: float(6)?,
            rhs_err: float(7)?,
            slack: float(8)?,
            status: rec[9].parse::<Status>().map_err(|e| bad("status", &e))?,
            seed: rec[10].parse().map_err(|e| bad("seed", &e))?,
            n: rec[11].parse().map_err(|e| bad("n", &e))?,
            message: None,
        });
    }
    Ok(rows)
}

pub fn write_json<W: Write>(report: &VerificationReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| CliError::Serialization(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::io("<json>", e))
}

pub fn read_json<R: Read>(input: R) -> Result<VerificationReport> {
    serde_json::from_reader(input).map_err(|e| CliError::Serialization(e.to_string()))
}

/// Writes the report to `path` in `format`.
pub fn emit_report(report: &VerificationReport, path: &Path, format: Format) -> Result<()> {
    let shown = path.display().to_string();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(&shown, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| CliError::io(&shown, e))?;
    let out = std::io::BufWriter::new(file);
    let res = match format {
        Format::Csv => write_csv(report, out),
        Format::Json => write_json(report, out),
    };
    res.map_err(|e| match e {
        CliError::IoFailure { source, .. } => CliError::io(shown, source),
        other => other,
    })
}

/// `pass`, `fail`, `report-only`, `error` counts.
pub fn summary(report: &VerificationReport) -> String {
    let count = |s: Status| report.rows.iter().filter(|r| r.status == s).count();
    format!(
        "{} rows: {} pass, {} fail, {} report-only, {} error",
        report.rows.len(),
        count(Status::Pass),
        count(Status::Fail),
        count(Status::ReportOnly),
        count(Status::Error)
    )
}
