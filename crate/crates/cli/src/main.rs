//! `anam`: simulate, preprocess, select, train, evaluate and plot additive
//! neural/lattice models from the command line.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anam_core::{AnamError, ErrorKind};
use clap::{Args, Parser, Subcommand};

use config::HyperFlags;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (unknown flag, invalid configuration or argument)
  3  data error (malformed CSV, schema mismatch, unknown category)
  4  numeric failure (divergence, rank-deficient design)
  5  I/O error (missing or unwritable file)";

#[derive(Debug, Parser)]
#[command(name = "anam", version, about, after_help = EXIT_CODES)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Training and validation inputs. Each CSV is read with the `schema.json`
/// next to it unless `--schema` is given.
#[derive(Debug, Args)]
struct FitData {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    val: PathBuf,
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw the synthetic Gamma severity dataset.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        /// Gamma dispersion.
        #[arg(long)]
        phi: Option<f64>,
        /// Intercept of the log mean.
        #[arg(long)]
        bias: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (data.csv, schema.json, truth.csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Filter response outliers, split, and standardise / one-hot encode
    /// with statistics from the training split.
    Preprocess {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        standardize: bool,
        #[arg(long)]
        one_hot: bool,
        #[arg(long)]
        iqr_filter: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (train.csv, val.csv, test.csv, schema.json,
        /// preprocess.json).
        #[arg(long)]
        out: PathBuf,
    },
    /// Stage 1: rank main effects by ensemble shape variance.
    SelectMain {
        #[command(flatten)]
        data: FitData,
        #[command(flatten)]
        hyper: HyperFlags,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for ensemble members.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory (selection.json, main_scores.csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Stage 2: rank heredity-eligible pairs by validation gain.
    SelectPairs {
        #[command(flatten)]
        data: FitData,
        #[command(flatten)]
        hyper: HyperFlags,
        /// Main effects to build pairs from (comma separated).
        #[arg(long, value_delimiter = ',', conflicts_with = "selection")]
        mains: Vec<String>,
        /// A stage-1 selection.json to take the main effects from.
        #[arg(long)]
        selection: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory (selection.json, pair_deltas.csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Stage 3: fit the selected terms with penalties and constraints.
    Train {
        #[command(flatten)]
        data: FitData,
        #[command(flatten)]
        hyper: HyperFlags,
        /// Main effects (comma separated); all features when omitted.
        #[arg(long, value_delimiter = ',')]
        mains: Vec<String>,
        /// Pairs as A:B (comma separated).
        #[arg(long, value_delimiter = ',')]
        pairs: Vec<String>,
        /// A selection.json whose chosen terms are used.
        #[arg(long, conflicts_with_all = ["mains", "pairs"])]
        selection: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Model archive to write; the history goes to <stem>.history.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Test-set NLL, RMSE and MAE of a model, optionally against a GLM.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Fit a GLM baseline on this training CSV and report it as well.
        #[arg(long)]
        glm_train: Option<PathBuf>,
        /// Ridge added to the GLM normal equations.
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-row mean and per-term contributions.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write every shape function on a grid over its training range.
    ExportShapes {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        resolution: usize,
        #[arg(long, default_value_t = 100)]
        pair_resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render exported shape grids as SVG line charts and heatmaps.
    Plot {
        /// Directory written by export-shapes.
        #[arg(long)]
        shapes: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &AnamError) -> u8 {
    match e.kind() {
        ErrorKind::Usage => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numeric => 4,
        ErrorKind::Io => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
