//! Simulation scenarios, train/test splits, error rates and cross-validation.

mod cv;
mod errors;
mod harness;
mod report;
mod scenario;
mod split;

pub use cv::{kfold_cv_tune, stratified_folds, CvResult};
pub use errors::{
    joint_training_error, one_at_a_time_training_error, posterior_predictive_labels, test_error, training_errors,
    TrainingPrediction,
};
pub use harness::{
    evaluate_classifiers, fit_latent, fit_plug_in, latent_run, PlugInFit, run_classifier, ClassifierRun, HarnessConfig, KNN_GRID, SVM_LAMBDA_GRID,
    SVM_U_GRID,
};
pub use report::{report_rows, write_report_csv, DatasetLabel, ErrorReport, ReportRow};
pub use scenario::{join_concordance, simulate_dataset, LinearComponent, Scenario, Simulation};
pub use split::{clustered_test_split, random_test_split, test_fraction};
