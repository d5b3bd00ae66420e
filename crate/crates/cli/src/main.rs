//! `voromle`: fit reward functions from pairwise preference data and probe
//! their robustness to near-duplicate alternatives.
//!
//! Exit codes: 0 success, 2 validation error, 3 solver non-convergence,
//! 4 I/O error.

mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use voromle_core::Error;

#[derive(Debug, Parser)]
#[command(name = "voromle", version, about)]
pub struct Cli {
    /// Seed for every randomized step (sampling, weight estimation).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Regularization strength of the reward objective.
    #[arg(long, global = true, default_value_t = 0.01)]
    pub lambda: f64,

    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Unit weights: the standard regularized MLE.
    Mle,
    /// Voronoi weights: the clone-robust weighted MLE.
    Wmle,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample comparisons for every pair of alternatives; also writes the
    /// exact win-rate matrix for reference.
    GenDataset {
        /// Alternatives CSV (header `id,c1,...,cd`).
        #[arg(long)]
        alternatives: PathBuf,
        /// Population JSON.
        #[arg(long)]
        population: PathBuf,
        /// Comparisons to draw per unordered pair.
        #[arg(long, default_value_t = 100)]
        per_pair: u64,
    },

    /// Estimate Voronoi weights of the alternatives over a box space.
    EstimateWeights {
        #[arg(long)]
        alternatives: PathBuf,
        /// `unit-cube`, `factor2`, or a space JSON path.
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 100_000)]
        n_samples: u64,
    },

    /// Fit rewards from a win-rate matrix or a comparisons file and write
    /// the rewards plus a full win-rate analysis.
    Solve {
        #[arg(long)]
        alternatives: PathBuf,
        /// Comparisons JSONL (mutually exclusive with --matrix).
        #[arg(long)]
        comparisons: Option<PathBuf>,
        /// Win-rate matrix JSON (mutually exclusive with --comparisons).
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        /// Weights JSON (wmle only; alternative to --space).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Space for on-the-fly weight estimation (wmle only).
        #[arg(long)]
        space: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        n_samples: u64,
        /// Gradient sup-norm stopping threshold.
        #[arg(long, default_value_t = 1e-9)]
        grad_tol: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iters: u64,
    },

    /// Win-rate scores (and residuals, when rewards are supplied) without
    /// solving.
    Analyze {
        #[arg(long)]
        alternatives: PathBuf,
        #[arg(long)]
        comparisons: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Weights JSON enabling the weighted scores.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Rewards JSON enabling model scores and residuals.
        #[arg(long)]
        rewards: Option<PathBuf>,
    },

    /// Run a built-in experiment: `clone-sweep`, `appendix-d`,
    /// `impossibility`, or `integral-check`.
    Experiment {
        #[arg(long)]
        name: String,
        /// Instance override for clone-sweep / integral-check.
        #[arg(long)]
        alternatives: Option<PathBuf>,
        /// Population JSON paired with --alternatives.
        #[arg(long)]
        population: Option<PathBuf>,
        /// clone-sweep: estimator to sweep.
        #[arg(long, value_enum, default_value_t = Algorithm::Wmle)]
        algorithm: Algorithm,
        /// clone-sweep: alternative to clone.
        #[arg(long, default_value = "c")]
        target: String,
        /// clone-sweep: unit direction, comma-separated coordinates.
        #[arg(long, default_value = "-1,0", allow_hyphen_values = true)]
        direction: String,
        /// clone-sweep: id of the inserted clone.
        #[arg(long, default_value = "c2")]
        new_id: String,
        /// clone-sweep: comma-separated epsilon grid.
        #[arg(long, default_value = "0.1,0.05,0.01,0.001")]
        eps_list: String,
        /// Space for weight estimation (`unit-cube`, `factor2`, or a path).
        #[arg(long, default_value = "unit-cube")]
        space: String,
        #[arg(long, default_value_t = 100_000)]
        n_samples: u64,
        /// impossibility: scale parameter, at least (ln 2)^2.
        #[arg(long = "C", default_value_t = std::f64::consts::LN_2 * std::f64::consts::LN_2)]
        c_param: f64,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence(_) => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = commands::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
