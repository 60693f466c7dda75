//! Command line front end: geometry, resonance sweeps, pseudo-pole lattices,
//! time-domain ringdown and a quick self test, all writing plain files.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dsrn", version, about = "Resonances and ringdown of charged fields on De Sitter-Reissner-Nordström black holes")]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// output directory (overrides the config)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// worker threads for internal sweeps
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// comma-separated angular indices, e.g. 5,10,20
    #[arg(long, global = true, value_delimiter = ',')]
    pub ell: Option<Vec<u32>>,
    /// charge product s = qQ
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub charge_product: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Horizons JSON and Regge-Wheeler chart CSV
    Geometry,
    /// Certified resonances per angular index, matched to the pseudo-pole lattice
    Resonances,
    /// Pseudo-pole lattice and barrier-top sets
    Pseudopoles,
    /// Time-domain evolution, local energy and ringdown fit
    Ringdown,
    /// Fast internal consistency checks
    Selftest,
}

/// Loads the config (file, then environment, then flags) and runs the command.
pub fn run(cli: &Cli, env: impl IntoIterator<Item = (String, String)>) -> Result<(), CliError> {
    let mut cfg = config::load(cli.config.as_deref(), env)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(ells) = &cli.ell {
        cfg.resonances.ells = ells.clone();
        cfg.pseudopoles.gamma0_ells = ells.clone();
        if let Some(first) = ells.first() {
            cfg.ringdown.ell = *first;
        }
    }
    if let Some(s) = cli.charge_product {
        cfg.resonances.charge_product = Some(s);
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Geometry => commands::geometry(&cfg),
        Command::Resonances => commands::resonances(&cfg),
        Command::Pseudopoles => commands::pseudopoles(&cfg),
        Command::Ringdown => commands::ringdown(&cfg),
        Command::Selftest => commands::selftest(&cfg),
    })
}
