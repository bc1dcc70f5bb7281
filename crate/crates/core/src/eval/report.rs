use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::classify::ClassifierKind;
use crate::error::Result;

/// Error rates of one classifier on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub classifier: ClassifierKind,
    /// Resubstitution error of plug-in classifiers.
    pub training_error: Option<f64>,
    pub training_error_oaat: Option<f64>,
    pub training_error_joint: Option<f64>,
    pub test_error: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    pub geweke_flagged: Option<bool>,
    pub wall_time_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ErrorReport {
    pub fn new(classifier: ClassifierKind, n_train: usize, n_test: usize) -> Self {
        Self {
            classifier,
            training_error: None,
            training_error_oaat: None,
            training_error_joint: None,
            test_error: None,
            n_train,
            n_test,
            geweke_flagged: None,
            wall_time_secs: 0.0,
            note: None,
        }
    }

    /// `(metric, rate)` pairs that are present.
    pub fn metrics(&self) -> Vec<(&'static str, f64)> {
        [
            ("training", self.training_error),
            ("training_one_at_a_time", self.training_error_oaat),
            ("training_joint", self.training_error_joint),
            ("test", self.test_error),
        ]
        .into_iter()
        .filter_map(|(m, v)| v.map(|v| (m, v)))
        .collect()
    }
}

/// Identifies the dataset a report belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetLabel {
    pub linear_component: String,
    pub dataset: String,
    pub kappa: Option<f64>,
}

/// One long-format row: classifier by dataset by metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub linear_component: String,
    pub dataset: String,
    pub kappa: Option<f64>,
    pub model_fit: String,
    pub metric: String,
    pub rate: f64,
}

pub fn report_rows(label: &DatasetLabel, reports: &[ErrorReport]) -> Vec<ReportRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.metrics().into_iter().map(move |(metric, rate)| ReportRow {
                linear_component: label.linear_component.clone(),
                dataset: label.dataset.clone(),
                kappa: label.kappa,
                model_fit: r.classifier.tag().to_string(),
                metric: metric.to_string(),
                rate,
            })
        })
        .collect()
}

pub fn write_report_csv<W: Write>(w: W, rows: &[ReportRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if rows.is_empty() {
        out.write_record(["linear_component", "dataset", "kappa", "model_fit", "metric", "rate"])?;
    }
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
