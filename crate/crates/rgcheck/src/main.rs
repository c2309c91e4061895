use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rgcheck::report::{self, Format};
use rgcheck::{tools, CliError, RunOptions};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "rgcheck", version, about = "Numerical verification of weighted Poincare and log-Sobolev inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run inequality suites from a configuration.
    Check(CheckArgs),
    /// Evaluate generalized Ricci tensors at points.
    Ricci(JobArgs),
    /// One-dimensional spectral gap.
    Spectrum(JobArgs),
    /// One-dimensional monotone transport diagnostics.
    Transport(JobArgs),
    /// Print the inequality catalog as JSON.
    Catalog,
}

#[derive(Args)]
struct CheckArgs {
    /// Configuration file, or the name of a bundled suite (smoke, bakry-literal).
    #[arg(long)]
    config: String,
    /// Overrides the configured seed.
    #[arg(long, env = "RG_SEED")]
    seed: Option<u64>,
    /// Overrides the configured sample budget.
    #[arg(long)]
    samples: Option<usize>,
    /// Report path; the configured outputs, or stdout, when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format; inferred from the extension of --out by default.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct JobArgs {
    /// Job description (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rgcheck: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Check(args) => check(args),
        Command::Ricci(args) => job(&args, |text| tools::run_ricci(&tools::parse_ricci(text)?)),
        Command::Spectrum(args) => job(&args, |text| tools::run_spectrum(&tools::parse_spectrum(text)?)),
        Command::Transport(args) => job(&args, |text| tools::run_transport(&tools::parse_transport(text)?)),
        Command::Catalog => {
            write_json_to(None, &riccikit::inequality_catalog::manifest_json())?;
            Ok(0)
        }
    }
}

fn check(args: CheckArgs) -> Result<i32, CliError> {
    let config = rgcheck::load_config(&args.config)?;
    let opts = RunOptions { seed: args.seed, samples: args.samples, workers: args.workers };
    let report = rgcheck::run_suite(&config, &opts)?;
    match (&args.out, &config.output) {
        (Some(path), _) => report::emit_report(&report, path, args.format.unwrap_or_else(|| Format::from_path(path)))?,
        (None, out) if out.csv.is_some() || out.json.is_some() => {
            if let Some(p) = &out.csv {
                report::emit_report(&report, p, Format::Csv)?;
            }
            if let Some(p) = &out.json {
                report::emit_report(&report, p, Format::Json)?;
            }
        }
        _ => {
            let stdout = std::io::stdout().lock();
            match args.format.unwrap_or(Format::Csv) {
                Format::Csv => report::write_csv(&report, stdout)?,
                Format::Json => report::write_json(&report, stdout)?,
            }
        }
    }
    eprintln!("{}", report::summary(&report));
    Ok(rgcheck::exit_status(&report))
}

fn job<T: Serialize + Send>(args: &JobArgs, f: impl FnOnce(&str) -> Result<T, CliError> + Send) -> Result<i32, CliError> {
    let shown = args.config.display().to_string();
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(shown, e))?;
    let value = rgcheck::runner::with_workers(args.workers, || f(&text))??;
    write_json_to(args.out.as_ref(), &value)?;
    Ok(0)
}

fn write_json_to<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Serialization(e.to_string()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::io(p.display().to_string(), e)),
        None => writeln!(std::io::stdout().lock(), "{text}").map_err(|e| CliError::io("<stdout>", e)),
    }
}
