//! Command-line front end of the laboratory.
//!
//! Each subcommand runs one suite (`all` runs every one) against either
//! a TOML configuration file or the builtin golden configuration, writes
//! `report.txt` plus the CSV payloads into the output directory, prints
//! the report, and exits 0 when everything was decided consistently,
//! 2 on contradictions (or, under `--strict`, on abstentions), and 1 on
//! errors such as an invalid configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stochlab::config::RunConfig;
use stochlab::runner::{run, RunOptions, Suite};

/// Numerical laboratory for parabolicity, stochastic completeness, and
/// the Feller property on warped geometries.
#[derive(Parser)]
#[command(name = "stochlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the three properties for every configured model.
    Verdict(CommonArgs),
    /// Exterior Dirichlet exhaustions and minimal-solution profiles.
    Feller(CommonArgs),
    /// Monte Carlo hitting functionals against the exterior solver.
    Mc(CommonArgs),
    /// Graph verdicts, kernel dumps, and warped-product equivalence.
    Submersion(CommonArgs),
    /// Curvature bounds and super-solution chains on immersed patches.
    Immersion(CommonArgs),
    /// Every suite, in canonical order.
    All(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (TOML); builtin golden configuration if omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Base seed for every stochastic component.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Spectral parameters, comma separated (overrides the config grid).
    #[arg(long, value_name = "LIST", value_delimiter = ',', num_args = 1..)]
    lambda: Option<Vec<f64>>,

    /// Exit 2 when any verdict is inconclusive.
    #[arg(long)]
    strict: bool,

    /// Output directory; defaults to the config's `run.out`, then the
    /// STOCHLAB_OUT environment variable, then ./stochlab-out.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn execute(suites: Vec<Suite>, args: &CommonArgs) -> stochlab::Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::golden(),
    };
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(lambda) = &args.lambda {
        config.run.lambda = lambda.clone();
    }
    let strict = args.strict || config.run.strict;
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.run.out.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("STOCHLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("stochlab-out"));

    let report = run(
        &config,
        &RunOptions {
            suites,
            out_dir: out_dir.clone(),
        },
    )?;
    // Ignore broken pipes (e.g. piping into `head`); the report is also
    // persisted as report.txt in the output directory.
    use std::io::Write as _;
    let stdout = std::io::stdout();
    let mut handle = stdout.lock();
    let _ = write!(handle, "{}", report.render());
    let _ = writeln!(handle, "outputs written to {}", out_dir.display());
    Ok(ExitCode::from(report.exit_code(strict) as u8))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (suites, args) = match &cli.command {
        Command::Verdict(a) => (vec![Suite::Verdict], a),
        Command::Feller(a) => (vec![Suite::Feller], a),
        Command::Mc(a) => (vec![Suite::Mc], a),
        Command::Submersion(a) => (vec![Suite::Submersion], a),
        Command::Immersion(a) => (vec![Suite::Immersion], a),
        Command::All(a) => (Suite::ALL.to_vec(), a),
    };
    match execute(suites, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
