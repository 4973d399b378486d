//! Command-line front end: `cone classify`, `seed`, `solve` and `verify`.
//!
//! [`run`] parses arguments and executes one command, returning what the
//! binary should print and its exit code. JSON goes to stdout, a short human
//! summary to stderr.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::ProblemConfig;
pub use error::{CliError, CliResult};

/// Seed of the `verify` sweeps when `--seed` is absent.
pub const DEFAULT_VERIFY_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "khessian", version, about = "Local solutions of k-Hessian equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Garding cone queries.
    Cone {
        #[command(subcommand)]
        command: ConeCommand,
    },
    /// Build a quadratic seed with sigma_k(tau) = c.
    Seed(SeedArgs),
    /// Solve a problem from a config file or a shipped preset.
    Solve(SolveArgs),
    /// Run seeded property sweeps.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum ConeCommand {
    /// Locate a spectrum relative to Gamma_k and split its boundary.
    Classify(ClassifyArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Comma-separated eigenvalues.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = khessian_core::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    /// Level of the positive-target seed, an integer or `full`.
    #[arg(long)]
    pub l: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// A suite name or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_VERIFY_SEED)]
    pub seed: u64,
}

/// What a command printed and how it exited.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn failed(err: &CliError) -> Self {
        Outcome {
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
            code: err.exit_code(),
        }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            if code == 0 {
                Outcome { stdout: text, stderr: String::new(), code }
            } else {
                Outcome { stdout: String::new(), stderr: text, code }
            }
        }
    }
}

pub fn execute(command: Command) -> Outcome {
    let result = match command {
        Command::Cone { command: ConeCommand::Classify(a) } => commands::cone_classify(&a),
        Command::Seed(a) => commands::seed(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    result.unwrap_or_else(|e| Outcome::failed(&e))
}
