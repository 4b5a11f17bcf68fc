mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nlsint", version, about = "Integrability checks, similarity maps and propagation for nonautonomous NLS equations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Override a scenario parameter, `name=value` (repeatable).
    #[arg(long = "param", global = true, value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Pass tolerance; falls back to $NLS_TOL, then the command default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory for report.json and artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for `check --catalog all`.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Replace the grid: `x_min,x_max,n_x,t_min,t_max,n_t`.
    #[arg(long, global = true, value_name = "SPEC", allow_hyphen_values = true)]
    pub grid: Option<String>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate the integrability conditions of a scenario.
    Check {
        /// Scenario JSON file or catalog name.
        #[arg(long, conflicts_with = "catalog", required_unless_present = "catalog")]
        scenario: Option<String>,
        /// Catalog entry, or `all`.
        #[arg(long)]
        catalog: Option<String>,
        /// Replace a coefficient, `name=EXPR` with name in f, g, gamma, v, h.
        #[arg(long = "coef", value_name = "NAME=EXPR")]
        coefs: Vec<String>,
    },
    /// Build f, γ and v from a seed g and free functions, then check them.
    Construct {
        #[arg(long)]
        g: String,
        #[arg(long, default_value = "1")]
        c1: String,
        #[arg(long, default_value = "1")]
        c2: String,
        #[arg(long, default_value = "0")]
        c3: String,
        #[arg(long, default_value = "0")]
        c4: String,
        /// Scenario name written into the output.
        #[arg(long, default_value = "constructed")]
        name: String,
    },
    /// Map a homogeneous solution Q(X) through a gauge.
    Map {
        /// Scenario JSON file with a gauge, or catalog name.
        #[arg(long)]
        gauge: String,
        /// `sn`, `sech`, or an expression in x (standing for X).
        #[arg(long = "Q", value_name = "NAME|EXPR")]
        q: String,
    },
    /// Check a candidate Lax pair against a scenario.
    Lax {
        #[arg(long)]
        scenario: String,
        /// JSON file of Lax functions, or `akns` for the constant-coefficient pair.
        #[arg(long)]
        laxfns: String,
        /// Spectral parameter for `--laxfns akns`.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Propagate the reference solution and compare.
    Simulate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        dt: f64,
        /// Propagation time measured from the grid's t_min.
        #[arg(long = "T", value_name = "T")]
        t: f64,
        #[arg(long, default_value = "zero")]
        boundary: String,
        /// Keep every k-th time level (default: about 100 levels).
        #[arg(long)]
        save_every: Option<usize>,
    },
    /// List catalog entries or print one as a scenario file.
    Catalog {
        #[arg(long, conflicts_with = "name", required_unless_present = "name")]
        list: bool,
        name: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(commands::run(&cli.common, &cli.command))
}
