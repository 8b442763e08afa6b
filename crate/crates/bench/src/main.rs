//! `dme-dc`: generate instances, run solvers, aggregate suites and reshape traces.

mod error;
mod generate;
mod options;
mod report;
mod run;
mod suite;
mod tables;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dme_dc::instance::{load_instance, save_instance};

use error::{CliError, CliResult};
use generate::GenSpec;
use options::SolveOptions;

#[derive(Parser)]
#[command(name = "dme-dc", version, about = "Difference-of-convex solvers with Moreau-envelope smoothing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON.
    Gen {
        #[command(flatten)]
        spec: GenSpec,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run one solver on one instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// JSON file of solver options; flags override its entries.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        options: SolveOptions,
        /// Trace CSV destination.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Summary JSON destination; the summary is always printed to stdout.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run a suite of seeds × instances × solvers and write per-cell averages.
    Bench {
        /// Suite JSON with `seeds`, `instances` and `solvers`.
        #[arg(long)]
        config: PathBuf,
        /// Aggregate CSV destination (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Directory receiving one trace CSV per run.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Merge trace CSVs into a long-format table (run_id, k, metric, value).
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Comma-separated metrics to keep; all when omitted.
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Writes to stdout, treating a closed pipe as success.
fn print_stdout(bytes: &[u8]) -> CliResult<()> {
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn solve(
    instance: &Path,
    config: Option<&Path>,
    flags: &SolveOptions,
    out: Option<&Path>,
    summary_path: Option<&Path>,
) -> CliResult<()> {
    let file = load_instance(instance)?;
    let opts = match config {
        Some(path) => SolveOptions::from_file(path)?.overlay(flags),
        None => flags.clone(),
    };
    let outcome = run::run(&file, &opts)?;
    if let Some(path) = out {
        tables::write_trace_file(path, &outcome.rows)?;
    }
    if let Some(path) = summary_path {
        write_json(path, &outcome.summary)?;
    }
    print_stdout((serde_json::to_string_pretty(&outcome.summary)? + "\n").as_bytes())?;
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Gen { spec, out } => {
            let file = spec.build()?;
            save_instance(&out, &file)?;
            Ok(())
        }
        Command::Solve { instance, config, options, out, summary } => {
            solve(&instance, config.as_deref(), &options, out.as_deref(), summary.as_deref())
        }
        Command::Bench { config, out, trace_dir } => {
            let suite = suite::Suite::from_file(&config)?;
            let rows = suite::run_suite(&suite, suite::pool_size(), trace_dir.as_deref())?;
            match out {
                Some(path) => suite::write_aggregate(csv::Writer::from_path(&path)?, &rows),
                None => {
                    let mut buf = Vec::new();
                    suite::write_aggregate(csv::Writer::from_writer(&mut buf), &rows)?;
                    print_stdout(&buf)
                }
            }
        }
        Command::Report { inputs, metrics, out } => {
            let rows = report::build_report(&inputs, &metrics)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path)
                        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
                    tables::write_long(std::io::BufWriter::new(file), &rows)
                }
                None => {
                    let mut buf = Vec::new();
                    tables::write_long(&mut buf, &rows)?;
                    print_stdout(&buf)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dme-dc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
