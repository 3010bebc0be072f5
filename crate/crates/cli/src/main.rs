mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Failure;

/// Scoring, calibration, dataset preparation and baselines for lab-of-origin
/// attribution of engineered DNA.
#[derive(Debug, Parser)]
#[command(name = "attrib", version)]
pub struct Cli {
    /// Seed for randomized steps; required by commands that shuffle.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `key=value` settings file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Prediction CSV: `sequence_id,<category ids...>`.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Label CSV: `sequence_id,lab_id`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a prediction matrix against a label set.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Compute the full metric report for one predictor.
    Score {
        #[command(flatten)]
        inputs: Inputs,
        /// Predictor name (defaults to the predictions file stem).
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        bins: Option<usize>,
        /// Category to analyse in detail.
        #[arg(long)]
        target: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy curve and X-metrics.
    Xmetrics {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated percentages, e.g. `80,90,95,99`.
        #[arg(long)]
        thresholds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reliability table with ECE and MCE.
    Calibration {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Element-wise average of prediction matrices.
    Ensemble {
        /// Member prediction CSVs.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Comma-separated member weights (uniform if omitted).
        #[arg(long)]
        weights: Option<String>,
    },
    /// Leaderboard over saved score reports.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write decile groups of top-10 accuracy to this CSV.
        #[arg(long)]
        deciles: Option<PathBuf>,
    },
    /// Pool small labs, group lineages, split and encode a corpus.
    Prep(PrepArgs),
    /// Alignment-free k-mer baselines.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Plot series (CSV, optionally SVG) from a saved score report.
    Plotdata {
        report: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    /// FASTA corpus; headers are `>sequence_id [lab_id]`.
    #[arg(long)]
    pub fasta: Option<PathBuf>,
    /// `sequence_id,lab_id` CSV overriding header labs.
    #[arg(long)]
    pub labs: Option<PathBuf>,
    /// Metadata CSV with a `sequence_id` column.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Lineage edge CSV `id_a,id_b`.
    #[arg(long)]
    pub lineage: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Labs below this many records are pooled.
    #[arg(long)]
    pub pool_threshold: Option<usize>,
    #[arg(long)]
    pub min_holdout: Option<usize>,
    /// Shorter sequences are kept out of leaderboard and holdout.
    #[arg(long)]
    pub min_length: Option<usize>,
    /// Train, leaderboard and holdout fractions, comma-separated.
    #[arg(long)]
    pub fractions: Option<String>,
    /// Obfuscated id length.
    #[arg(long)]
    pub token_length: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Similarity,
    NaiveBayes,
}

macro_rules! value_enum_from_str {
    ($($t:ty),*) => {$(
        impl std::str::FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
    )*};
}

value_enum_from_str!(Mode, Method);

#[derive(Debug, Subcommand)]
pub enum BaselineCommand {
    /// Build a k-mer index from labelled training sequences.
    BuildIndex {
        #[arg(long)]
        fasta: Option<PathBuf>,
        /// `sequence_id,lab_id` CSV; header labs are used if omitted.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        /// Fold each k-mer with its reverse complement.
        #[arg(long)]
        canonical: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict lab probabilities for query sequences.
    Predict {
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        fasta: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Must match the index if given.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        evalue_threshold: Option<f64>,
        /// Naive-Bayes smoothing.
        #[arg(long)]
        alpha: Option<f64>,
        /// Label CSV whose categories are added as columns.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Validation(lines) => {
                    for l in lines {
                        eprintln!("{l}");
                    }
                }
                Failure::Config(e) | Failure::Internal(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(failure.code())
        }
    }
}
