//! Command-line front end: one experiment per invocation, configured by a
//! JSON file, reported as versioned JSON or per-table CSV.

use clap::{Parser, Subcommand};
use skewlab::config::ExperimentConfig;
use skewlab::report::{run_experiment, OutputFormat};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "skewlab",
    version,
    about = "Bergman-space laboratory: Kobayashi geometry, Carleson diagnostics, Toeplitz probes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derived operator parameters (lambda, gamma, theta) and hypothesis flags.
    Params(RunArgs),
    /// Kobayashi-ball volumes, boundary-distance comparability, lattice summary.
    Geometry(RunArgs),
    /// Skew-Carleson classification and norm sweep for a measure.
    Carleson(RunArgs),
    /// Berezin transform sweep and the Berezin diagnostic.
    Berezin(RunArgs),
    /// Two-sided operator-norm sandwich (lower probe, estimate, skew norm).
    Toeplitz(RunArgs),
    /// Compactness probe along a boundary sequence.
    Vanishing(RunArgs),
    /// Built-in acceptance battery; exits nonzero if any criterion fails.
    Verify(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment configuration (JSON). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (JSON file, or stem for CSV tables). JSON defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "json")]
    format: String,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (subcommand, args) = match &cli.command {
        Command::Params(a) => ("params", a),
        Command::Geometry(a) => ("geometry", a),
        Command::Carleson(a) => ("carleson", a),
        Command::Berezin(a) => ("berezin", a),
        Command::Toeplitz(a) => ("toeplitz", a),
        Command::Vanishing(a) => ("vanishing", a),
        Command::Verify(a) => ("verify", a),
    };
    match run(subcommand, args) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("skewlab: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(subcommand: &str, args: &RunArgs) -> skewlab::Result<ExitCode> {
    if let Ok(threads) = std::env::var("SKEWLAB_THREADS") {
        let count: usize = threads.parse().map_err(|_| {
            skewlab::Error::config(None, format!("SKEWLAB_THREADS must be an integer, got `{threads}`"))
        })?;
        // ignore failure if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global();
    }
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let format: OutputFormat = args.format.parse()?;
    let report = run_experiment(subcommand, &config)?;
    if subcommand == "verify" {
        for check in &report.checks {
            let status = if check.passed { "PASS" } else { "FAIL" };
            eprintln!(
                "[{status}] {:>2}. {} ({} ms)",
                check.id, check.name, check.elapsed_ms
            );
        }
    }
    report.emit(format, args.out.as_deref())?;
    if subcommand == "verify" && !report.all_passed() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
