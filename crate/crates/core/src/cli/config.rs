use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classify::ClassifierKind;
use crate::error::{Error, Result};
use crate::eval::LinearComponent;
use crate::model::PriorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Clustered,
    Random,
    None,
}

/// Options shared by every command; each may also come from the `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Data CSV with columns row, col, y, x1.., is_test.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Classifier to fit, or a saved model file when classifying.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Linear component of the simulated scenario.
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    /// Spatial variance fraction; a comma-separated list for `compare`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub kappa: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub iters: Option<usize>,
    #[arg(long = "burn-in", global = true)]
    pub burn_in: Option<usize>,
    #[arg(long, global = true)]
    pub thin: Option<usize>,
    /// Comma-separated classifier tags, or `all`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub classifiers: Option<Vec<String>>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub rows: Option<usize>,
    #[arg(long, global = true)]
    pub cols: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub split: Option<SplitKind>,
    /// Simulated datasets per kappa for `compare`.
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Write SVG plots next to the reports.
    #[arg(long, global = true)]
    pub plots: Option<bool>,
    #[arg(skip)]
    pub priors: Option<PriorSpec>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("config file {}: {e}", path.display())))
    }

    /// Fields set in `flags` win over those in `self`.
    pub fn overridden_by(self, flags: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: flags.$f.or(self.$f)),* } };
        }
        pick!(data, model, scenario, kappa, rho, seed, iters, burn_in, thin, classifiers, out, rows, cols, split, replicates, plots, priors)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn iters(&self) -> usize {
        self.iters.unwrap_or(20_000)
    }

    /// Half of the iterations unless set.
    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.iters() / 2)
    }

    pub fn component(&self) -> Result<LinearComponent> {
        self.scenario.as_deref().unwrap_or("simple1").parse()
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.kappa.clone().unwrap_or_else(|| vec![1.0])
    }

    pub fn data_path(&self) -> Result<&Path> {
        self.data.as_deref().ok_or_else(|| Error::InvalidInput("--data is required".into()))
    }

    pub fn classifier_list(&self) -> Result<Vec<ClassifierKind>> {
        let tags = self.classifiers.clone().unwrap_or_else(|| vec!["all".into()]);
        let mut out = Vec::new();
        for t in tags {
            if t.trim().eq_ignore_ascii_case("all") {
                out.extend(ClassifierKind::ALL);
            } else {
                out.push(ClassifierKind::from_tag(&t).ok_or_else(|| Error::InvalidInput(format!("unknown classifier `{t}`")))?);
            }
        }
        out.dedup();
        Ok(out)
    }
}
