//! Flag definitions. Every flag can also come from a `--config` file.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

pub const CACHE_ENV: &str = "STRONG_TAYLOR_CACHE_DIR";

#[derive(Debug, Parser)]
#[command(name = "strong-taylor", version, about = "Strong Taylor schemes and their iterated-integral machinery")]
pub struct Cli {
    /// Flat `key = value` file; keys are flag names without the dashes.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory for coefficient tables.
    #[arg(long, global = true, env = CACHE_ENV, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build (or load) one coefficient table and report its Parseval sum.
    #[command(args_override_self = true)]
    Coeffs(CoeffsArgs),
    /// Mean-square errors of the series approximations.
    #[command(args_override_self = true)]
    MseTable(MseTableArgs),
    /// Smallest truncation order meeting the approximation condition.
    #[command(args_override_self = true)]
    SelectQ(SelectQArgs),
    /// Simulate trajectories of a registry model.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Strong error against the exact solution over a list of steps.
    #[command(args_override_self = true)]
    Convergence(ConvergenceArgs),
    /// Monte-Carlo check of one integral family against a fine-grid reference.
    #[command(args_override_self = true)]
    ValidateIntegrals(ValidateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Coeffs(_) => "coeffs",
            Command::MseTable(_) => "mse-table",
            Command::SelectQ(_) => "select-q",
            Command::Simulate(_) => "simulate",
            Command::Convergence(_) => "convergence",
            Command::ValidateIntegrals(_) => "validate-integrals",
        }
    }
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    /// Weight profile as exponent digits, innermost first (`000`, `100`, ...).
    #[arg(long)]
    pub profile: String,
    #[arg(long)]
    pub q: usize,
}

#[derive(Debug, Args)]
pub struct MseTableArgs {
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct SelectQArgs {
    /// Restrict to one family.
    #[arg(long)]
    pub profile: Option<String>,
    /// Restrict to one index pattern, e.g. `1-2-2`.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long, default_value = "2.0")]
    pub gamma: String,
    #[arg(long)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    #[arg(long, default_value = "gbm-2noise")]
    pub model: String,
    #[arg(long, default_value = "2.0")]
    pub gamma: String,
    #[arg(long, default_value = "ito")]
    pub calculus: String,
    /// `direct` or `combined` (Itô only).
    #[arg(long, default_value = "direct")]
    pub route: String,
    /// `auto`, `auto:C`, `N`, or a list such as `2,000=6,00000=1`.
    #[arg(long, default_value = "auto")]
    pub q: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long)]
    pub dt: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub paths: u64,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Comma-separated steps; at least three.
    #[arg(long, default_value = "0.25,0.125,0.0625,0.03125,0.015625")]
    pub dt: String,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1000)]
    pub paths: u64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub profile: String,
    /// Zero-based components innermost first, e.g. `0,1,2`; defaults to all distinct.
    #[arg(long)]
    pub components: Option<String>,
    /// `direct` or `combined`.
    #[arg(long, default_value = "direct")]
    pub route: String,
    #[arg(long)]
    pub q: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 10_000)]
    pub substeps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
