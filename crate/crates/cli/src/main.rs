//! `qinside run <scenario-file>`: evaluates a scenario and prints its report.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use qinside_core::{emit_report, parse_scenario, run_command, Format};

#[derive(Parser)]
#[command(name = "qinside", version, about = "Measurement from inside the observer: scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and emit its report.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "text", value_parser = parse_format)]
        format: Format,
        /// Write the report here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario sample count.
        #[arg(long)]
        samples: Option<u64>,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: qinside_core::Error| e.to_string())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let Cmd::Run { scenario, format, output, seed, samples } = cli.command;
    let text = std::fs::read_to_string(&scenario)
        .with_context(|| format!("cannot read scenario file {}", scenario.display()))?;
    let mut s = parse_scenario(&text).with_context(|| format!("invalid scenario {}", scenario.display()))?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    if let Some(n) = samples {
        anyhow::ensure!(n >= 1, "--samples must be at least 1");
        s.samples = n;
    }
    let report = run_command(&s).context("scenario evaluation failed")?;
    let rendered = emit_report(&report, format);
    match output {
        Some(path) => std::fs::write(&path, rendered).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
