//! `adsdirac`: batch driver for spectra, evolution, equipartition, causal
//! comparison, scalar-field classification and self-tests.
//!
//! Exit codes: 0 success, 2 configuration, 3 regime, 4 numerical failure.

mod commands;
mod config;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

/// Error carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn regime(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Failure { code: 4, message: message.into() }
    }
}

impl From<adsdirac::error::Error> for Failure {
    fn from(e: adsdirac::error::Error) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "adsdirac", version, about = "Dirac and scalar fields on anti-de Sitter space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Per-mode eigenvalues for one boundary condition.
    Spectrum,
    /// Charge, chirality and its running Cesàro mean along a time grid.
    Evolve,
    /// Cesàro means of the chirality at the given horizons.
    Equipartition,
    /// Discrepancy of two boundary dynamics inside and outside the causal region.
    CausalCompare,
    /// Weyl classification and lowest eigenvalues of the scalar radial operators.
    Kg,
    /// Built-in consistency checks.
    Selftest {
        /// Suite name: harmonics | green.
        suite: Option<String>,
    },
}

/// Flags override the fields of the configuration document.
#[derive(Args)]
struct Flags {
    /// JSON configuration document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "Lambda", global = true)]
    lambda: Option<f64>,
    #[arg(long = "M", global = true, allow_hyphen_values = true)]
    mass: Option<f64>,
    /// dirichlet | mit | chiral | aps | genA+:a11,a12re,a12im,a22 | genA-:...
    #[arg(long, global = true)]
    bc: Option<String>,
    /// Second boundary condition for causal-compare.
    #[arg(long = "bc-b", global = true)]
    bc_b: Option<String>,
    /// Largest 2l (odd).
    #[arg(long = "two-l-max", global = true)]
    two_l_max: Option<i32>,
    /// Radial resolution.
    #[arg(long = "n", global = true)]
    n_nodes: Option<usize>,
    #[arg(long = "n-eigs", global = true)]
    n_eigs: Option<usize>,
    #[arg(long = "accept-tol", global = true)]
    accept_tol: Option<f64>,
    #[arg(long = "gap-tol", global = true)]
    gap_tol: Option<f64>,
    #[arg(long = "rel-tol", global = true)]
    rel_tol: Option<f64>,
    /// exact | sqrt | linear
    #[arg(long = "heavy-decay", global = true)]
    heavy_decay: Option<String>,
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    centre: Option<f64>,
    #[arg(long, global = true)]
    width: Option<f64>,
    #[arg(long, global = true)]
    rho0: Option<f64>,
    /// Comma-separated time grid.
    #[arg(long, global = true, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Comma-separated averaging horizons.
    #[arg(long, global = true, value_delimiter = ',')]
    horizons: Option<Vec<f64>>,
    /// Comma-separated mass coefficients of the scalar operator.
    #[arg(long = "alpha", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Option<Vec<f64>>,
    /// Comma-separated orbital indices.
    #[arg(long = "l", global = true, value_delimiter = ',')]
    ls: Option<Vec<u32>>,
    /// Comma-separated extension angles.
    #[arg(long = "theta", global = true, value_delimiter = ',')]
    thetas: Option<Vec<f64>>,
    #[arg(long = "n-basis", global = true)]
    n_basis: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default ./out).
    #[arg(long = "out", global = true)]
    output_dir: Option<PathBuf>,
}

impl Flags {
    fn to_config(&self, suite: Option<String>) -> RunConfig {
        RunConfig {
            lambda: self.lambda,
            mass: self.mass,
            bc: self.bc.clone(),
            bc_b: self.bc_b.clone(),
            two_l_max: self.two_l_max,
            n_nodes: self.n_nodes,
            n_eigs: self.n_eigs,
            accept_tol: self.accept_tol,
            gap_tol: self.gap_tol,
            rel_tol: self.rel_tol,
            heavy_decay: self.heavy_decay.clone(),
            preset: self.preset.clone(),
            centre: self.centre,
            width: self.width,
            weights: None,
            rho0: self.rho0,
            times: self.times.clone(),
            horizons: self.horizons.clone(),
            alphas: self.alphas.clone(),
            ls: self.ls.clone(),
            thetas: self.thetas.clone(),
            n_basis: self.n_basis,
            seed: self.seed,
            suite,
            output_dir: self.output_dir.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let suite = match &cli.command {
        Command::Selftest { suite } => suite.clone(),
        _ => None,
    };
    let base = match &cli.flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let config = base.overridden_by(&cli.flags.to_config(suite));
    match cli.command {
        Command::Spectrum => commands::spectrum(config),
        Command::Evolve => commands::evolve(config),
        Command::Equipartition => commands::equipartition(config),
        Command::CausalCompare => commands::causal_compare(config),
        Command::Kg => commands::kg(config),
        Command::Selftest { .. } => commands::selftest(config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
