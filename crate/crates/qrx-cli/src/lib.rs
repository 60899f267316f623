//! Command-line experiment runner for the qrx receiver toolkit.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod table;

use clap::{Parser, Subcommand};
use commands::{bpsk::BpskArgs, figures::FiguresArgs, gaussian::GaussianArgs, hadamard::HadamardArgs, qubit::QubitArgs, tree::TreeArgs};
use error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "qrx", version, about = "Quantum receiver and Hadamard-code rate experiments")]
pub struct Cli {
    /// JSON object whose keys (long option names) override the subcommand options; may name the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "QRX_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Optimized binary coherent-state receivers over an amplitude grid.
    BpskSweep(BpskArgs),
    /// Hadamard-code rates over (E, N, M) grids.
    HadamardRates(HadamardArgs),
    /// Minimum-error discrimination of qubit states.
    QubitDisc(QubitArgs),
    /// Binary-tree decomposition round trip of POVMs.
    TreeDecompose(TreeArgs),
    /// Phase-insensitive Gaussian channel checks.
    GaussianCheck(GaussianArgs),
    /// Datasets of the Hadamard-code rate plots.
    Figures(FiguresArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BpskSweep(_) => "bpsk-sweep",
            Self::HadamardRates(_) => "hadamard-rates",
            Self::QubitDisc(_) => "qubit-disc",
            Self::TreeDecompose(_) => "tree-decompose",
            Self::GaussianCheck(_) => "gaussian-check",
            Self::Figures(_) => "figures",
        }
    }

    /// Subcommand with every option at its default.
    pub fn defaults(name: &str) -> CliResult<Self> {
        Cli::try_parse_from(["qrx", name])
            .ok()
            .and_then(|cli| cli.command)
            .ok_or_else(|| CliError::config(format!("unknown subcommand '{name}'")))
    }

    pub fn run(&self) -> CliResult<()> {
        match self {
            Self::BpskSweep(a) => commands::bpsk::run(a),
            Self::HadamardRates(a) => commands::hadamard::run(a),
            Self::QubitDisc(a) => commands::qubit::run(a),
            Self::TreeDecompose(a) => commands::tree::run(a),
            Self::GaussianCheck(a) => commands::gaussian::run(a),
            Self::Figures(a) => commands::figures::run(a),
        }
    }
}

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::config("thread count must be positive"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot configure {n} threads: {e}")))
}

pub fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    config::resolve(cli.command, cli.config.as_deref())?.run()
}
