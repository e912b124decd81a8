//! `ccid`: simulate congestion-control traces, build datasets, train and
//! evaluate the GRU classifier, and draw figures.

mod dataset;
mod eval;
mod manifest;
mod output;
mod plot;
mod simulate;
mod svg;
mod train;
mod units;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use crate::manifest::RunManifest;

#[derive(Parser)]
#[command(name = "ccid", version, about = "TCP congestion-control identification toolkit")]
struct Cli {
    /// Root directory for outputs whose path is not given explicitly.
    #[arg(long, global = true, env = "CCID_OUT_DIR", default_value = "ccid-out")]
    out_root: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate labelled flow traces and write one CSV per flow.
    Simulate(simulate::SimulateArgs),
    /// Smooth, balance, window, split and normalise trace CSVs into a dataset.
    BuildDataset(dataset::BuildDatasetArgs),
    /// Train the classifier on a dataset.
    Train(train::TrainArgs),
    /// Evaluate a checkpoint on a dataset partition.
    Eval(eval::EvalArgs),
    /// Draw the loss curve or per-protocol trace panels as SVG.
    Plot(plot::PlotArgs),
    /// Run a command again from the manifest it wrote.
    Replay {
        /// Manifest file written by an earlier run.
        manifest: PathBuf,
    },
}

fn replay(path: &Path) -> Result<()> {
    let m = RunManifest::read(path)?;
    if m.tool != env!("CARGO_PKG_NAME") {
        bail!("{} was not written by ccid", path.display());
    }
    let config = m.config;
    match m.subcommand.as_str() {
        simulate::NAME => simulate::run(serde_json::from_value(config)?),
        dataset::NAME => dataset::run(serde_json::from_value(config)?),
        train::NAME => train::run(serde_json::from_value(config)?),
        eval::NAME => eval::run(serde_json::from_value(config)?),
        plot::NAME => plot::run(serde_json::from_value(config)?),
        other => bail!("manifest names unknown subcommand {other:?}"),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let root = &cli.out_root;
    match cli.command {
        Command::Simulate(a) => simulate::run(a.resolve(root)),
        Command::BuildDataset(a) => dataset::run(a.resolve(root)),
        Command::Train(a) => train::run(a.resolve(root)),
        Command::Eval(a) => eval::run(a.resolve(root)),
        Command::Plot(a) => plot::run(a.resolve(root)),
        Command::Replay { manifest } => replay(&manifest),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
