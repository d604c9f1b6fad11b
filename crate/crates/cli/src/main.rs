use std::path::PathBuf;
use std::process::ExitCode;

use chordflow_cli::{cmd_demo, cmd_flow, cmd_sweep, cmd_verify, config, CliError, Exit};
use clap::{Parser, Subcommand};

/// Chord shortening flow laboratory.
#[derive(Parser)]
#[command(name = "chordflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flow one initial chord; writes trajectory.csv, outcome.json, flow.svg.
    Flow {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow a grid of chords and cluster the limits; writes census.json, census.svg.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write every individual limit to limits.csv.
        #[arg(long)]
        limits: bool,
    },
    /// Run the golden verification suites; writes verify_report.json.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in example: flat, strip, ellipse-30deg, two-circles, ellipsoid.
    Demo {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<Exit, CliError> {
    match cli.command {
        Command::Flow { config, out } => cmd_flow(&config::load_config(&config)?, out.as_deref()),
        Command::Sweep {
            config,
            out,
            jobs,
            limits,
        } => cmd_sweep(&config::load_config(&config)?, out.as_deref(), jobs, limits),
        Command::Verify { suite, out } => cmd_verify(&suite, &config::resolve_out_dir(out.as_deref(), None)),
        Command::Demo { name, out } => cmd_demo(&name, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::Error as u8)
        }
    }
}
