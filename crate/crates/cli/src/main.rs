//! `dendrite`: batch runner for the phase-field dendrite solver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "dendrite",
    version,
    about = "Phase-field dendritic solidification runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where parameters come from: preset, then config file, then `--set`.
#[derive(Debug, Args)]
struct ParamSource {
    /// Named parameter bundle used as the base (paper-s3, paper-s6, desk).
    #[arg(long)]
    preset: Option<String>,

    /// Config file of `key = value` lines applied over the base.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Single overrides applied last, e.g. `--set latent_heat=2.0`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write its outputs into a directory.
    Run {
        #[command(flatten)]
        params: ParamSource,

        #[arg(long)]
        out: PathBuf,

        /// Run even if dt exceeds the explicit stability bound.
        #[arg(long)]
        force: bool,

        /// Worker threads for the stencil sweeps (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run one simulation per value of a single parameter.
    Sweep {
        #[command(flatten)]
        params: ParamSource,

        /// Config key to vary.
        #[arg(long)]
        param: String,

        /// Comma-separated values for the swept key.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,

        #[arg(long)]
        out: PathBuf,

        #[arg(long)]
        force: bool,

        /// Runs executed concurrently (default 1).
        #[arg(long, default_value_t = 1)]
        jobs: usize,

        /// Worker threads per run.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print resolved parameters and stability limits; exit 0 iff stable.
    Check {
        #[command(flatten)]
        params: ParamSource,
    },
    /// Convert a stored snapshot to PGM or CSV.
    Render {
        snapshot: PathBuf,

        /// Output graymap path.
        #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
        out: Option<PathBuf>,

        /// Output CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            params,
            out,
            force,
            workers,
        } => commands::run(&params, &out, force, workers),
        Command::Sweep {
            params,
            param,
            values,
            out,
            force,
            jobs,
            workers,
        } => commands::sweep(&params, &param, &values, &out, force, jobs, workers),
        Command::Check { params } => commands::check(&params),
        Command::Render { snapshot, out, csv } => {
            commands::render(&snapshot, out.as_deref(), csv.as_deref())
        }
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
