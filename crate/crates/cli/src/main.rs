//! `qfluct` command-line front end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "qfluct", version, about = "Quantum fluctuation dynamics on open spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certificate report: reduced generator, Kossakowski, invariance, CP.
    Check(Common),
    /// Microscopic versus mesoscopic correlation table as CSV.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Record wall-clock seconds per row (otherwise 0, for reproducible files).
        #[arg(long)]
        timing: bool,
    },
    /// Mesoscopic propagator table as CSV.
    Meso(Common),
    /// Run every invariant suite and print one summary line per suite.
    Verify(Common),
    /// Closed-form checks of the spin-1 model over a parameter grid.
    DemoSpin1(Common),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Model definition file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated chain lengths N_T.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub r: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<f64>>,
    /// Threshold on final deviations.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for the randomised property checks only.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    qfluct::par::configure_workers();
    let result = match cli.command {
        Command::Check(c) => commands::check(&c),
        Command::Converge { common, timing } => commands::converge(&common, timing),
        Command::Meso(c) => commands::meso(&c),
        Command::Verify(c) => commands::verify(&c),
        Command::DemoSpin1(c) => commands::demo_spin1(&c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
