//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bellbench", version, about = "Two-channel Bell inequality toolkit")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Prediction source, angles and config file shared by several commands.
#[derive(Clone, Debug, Default, Args)]
pub struct SourceArgs {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Ideal source: unit efficiency, full solid angle, no depolarization.
    #[arg(long, conflicts_with_all = ["eta", "phi", "f_override"])]
    pub ideal: bool,

    /// Detector efficiency.
    #[arg(long)]
    pub eta: Option<f64>,

    /// Aperture half-angle in degrees.
    #[arg(long, value_name = "DEG")]
    pub phi: Option<f64>,

    /// Replace the depolarization factor computed from the aperture.
    #[arg(long, value_name = "F")]
    pub f_override: Option<f64>,

    /// Orientations a,b,a',b',r in degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "A,B,A',B',R")]
    pub angles: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic tables and inequality reports for one configuration.
    Predict {
        #[command(flatten)]
        source: SourceArgs,
        /// Inequalities to report (default: all).
        #[arg(long, value_delimiter = ',')]
        ineq: Vec<String>,
        /// Setting angle of the CH comparison, degrees.
        #[arg(long, value_name = "DEG")]
        phi_setting: Option<f64>,
        /// Also write the probability table as CSV.
        #[arg(long, value_name = "FILE")]
        table_out: Option<PathBuf>,
    },
    /// Reports for a probability or count table read from CSV.
    Evaluate {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        ineq: Vec<String>,
    },
    /// Monte Carlo run with binomial error bars.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        /// Pairs per setting.
        #[arg(long)]
        pairs: Option<u64>,
        #[arg(long, env = "BELLBENCH_SEED")]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        ineq: Vec<String>,
        /// Write the raw counts as CSV.
        #[arg(long, value_name = "FILE")]
        counts_out: Option<PathBuf>,
    },
    /// Search orientations that violate an inequality the most.
    Optimize {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        ineq: Option<String>,
        /// Orientations to search, e.g. a,b,a'.
        #[arg(long, value_delimiter = ',')]
        free: Option<Vec<String>>,
        #[arg(long, value_name = "DEG")]
        grid_step: Option<f64>,
        #[arg(long, value_name = "DEG")]
        tolerance: Option<f64>,
    },
    /// Check Z >= 0 on all box vertices and random interior points.
    VerifyTheorem {
        #[arg(long = "U", value_name = "U")]
        u: f64,
        #[arg(long = "V", value_name = "V")]
        v: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, env = "BELLBENCH_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Exact local bound by deterministic-strategy enumeration.
    LhvBound {
        functional: String,
        /// none, supplementary or gr.
        constraint: String,
    },
    /// Worst value over random local hidden-variable models.
    LhvSample {
        functional: String,
        constraint: String,
        #[arg(long, default_value_t = 10_000)]
        models: usize,
        /// Response functions mixed in each model.
        #[arg(long, default_value_t = 4)]
        strategies: usize,
        #[arg(long, env = "BELLBENCH_SEED", default_value_t = 0)]
        seed: u64,
    },
}
