//! `zcl`: web cache laboratory front end.
//!
//! Exit codes: 0 success, 1 internal error, 2 bad input or usage.

mod model;
mod pipeline;
mod report;
mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::run::{write_manifest, CliResult, Run, RunManifest, EXIT_INTERNAL};

#[derive(Debug, Parser)]
#[command(name = "zcl", version, about = "Zipf-law web cache analysis and simulation")]
struct Cli {
    /// Write a JSON run manifest here, also when the command fails.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
enum Command {
    /// Convert a Squid access log to the canonical trace CSV.
    Ingest(pipeline::IngestArgs),
    /// Special points, exponent and lifetimes of a trace.
    Analyze(pipeline::AnalyzeArgs),
    /// Generate a synthetic Zipf workload.
    Synth(pipeline::SynthArgs),
    /// Replay a trace through one or more cache configurations.
    Simulate(pipeline::SimulateArgs),
    /// Evaluate an analytic model.
    Model(model::ModelArgs),
    /// Emit figure data from result files.
    Report(report::ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Analyze(_) => "analyze",
            Command::Synth(_) => "synth",
            Command::Simulate(_) => "simulate",
            Command::Model(_) => "model",
            Command::Report(_) => "report",
        }
    }

    fn execute(&self, run: &mut Run) -> CliResult {
        match self {
            Command::Ingest(a) => pipeline::ingest(a, run),
            Command::Analyze(a) => pipeline::analyze(a, run),
            Command::Synth(a) => pipeline::synth(a, run),
            Command::Simulate(a) => pipeline::simulate_cmd(a, run),
            Command::Model(a) => model::model(a, run),
            Command::Report(a) => report::report(a, run),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let mut run = Run::default();
    let outcome = cli.command.execute(&mut run);
    let mut code = match &outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    if let Some(path) = &cli.manifest {
        let manifest = RunManifest {
            command: cli.command.name().to_string(),
            inputs: std::mem::take(&mut run.inputs),
            parameters: serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null),
            seed: run.seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs: std::mem::take(&mut run.outputs),
            status: if code == 0 { "ok" } else { "error" },
            exit_code: code,
            error: outcome.err().map(|e| e.to_string()),
        };
        if let Err(e) = write_manifest(path, &manifest) {
            eprintln!("error: manifest {}: {e}", path.display());
            if code == 0 {
                code = EXIT_INTERNAL;
            }
        }
    }
    std::process::exit(code);
}
