//! Batch command line: `simulate | fit | classify | evaluate | compare`.

mod commands;
mod config;
mod csvio;
mod svg;

use clap::{Parser, Subcommand};

pub use commands::{cmd_classify, cmd_compare, cmd_evaluate, cmd_fit, cmd_simulate};
pub use config::{RunConfig, SplitKind};
pub use csvio::{prediction_row, read_dataset, write_dataset, write_predictions, PredictionRow};
pub use svg::{classification_map, error_vs_kappa_chart};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "spatial-classify", version, about = "Spatial binary classification with probit SGLM/SGLMM and comparison classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON file with any of the options below; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub options: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Simulate a dataset: writes data.csv and scenario.json.
    Simulate,
    /// Fit one model: writes chains.jsonl or model.json plus fit_report.json.
    Fit,
    /// Score locations with a saved model: writes predictions.csv.
    Classify,
    /// Fit and score classifiers on one dataset: writes report.csv and report.json.
    Evaluate,
    /// Simulate replicates over kappa values and evaluate each.
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Fit => "fit",
            Command::Classify => "classify",
            Command::Evaluate => "evaluate",
            Command::Compare => "compare",
        }
    }
}

/// 2 for input validation problems, 1 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        2
    } else {
        1
    }
}

pub fn run(cli: Cli) -> crate::Result<()> {
    let file = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let cfg = file.overridden_by(cli.options);
    match cli.command {
        Command::Simulate => cmd_simulate(&cfg),
        Command::Fit => cmd_fit(&cfg),
        Command::Classify => cmd_classify(&cfg),
        Command::Evaluate => cmd_evaluate(&cfg),
        Command::Compare => cmd_compare(&cfg),
    }
}
