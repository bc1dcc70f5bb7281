//! Every classifier on one simulated dataset, as `evaluate --classifiers all` runs them.

use spatial_classify::classify::ClassifierKind;
use spatial_classify::eval::{clustered_test_split, evaluate_classifiers, simulate_dataset, HarnessConfig, LinearComponent, Scenario};
use spatial_classify::model::McmcConfig;

fn main() -> spatial_classify::Result<()> {
    let mut sc = Scenario::new(LinearComponent::Multiple, 0.75, 13).with_grid(12, 12);
    sc.rho = 0.9;
    let mut data = simulate_dataset(&sc, &mut sc.stream().rng())?.data;
    data.test_mask = clustered_test_split(&data.domain().expect("grid"), 9, 4, &mut sc.stream().child(1).rng())?;

    let cfg = HarnessConfig::new(ClassifierKind::ALL.to_vec(), McmcConfig::new(1000, 500, 4), 4);
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    println!("{:<14} {:>8} {:>8} {:>8} {:>8} {:>7}", "classifier", "train", "oaat", "joint", "test", "secs");
    for run in evaluate_classifiers(&data, &cfg) {
        let r = &run.report;
        println!(
            "{:<14} {:>8} {:>8} {:>8} {:>8} {:>7.2} {}",
            r.classifier.tag(),
            fmt(r.training_error),
            fmt(r.training_error_oaat),
            fmt(r.training_error_joint),
            fmt(r.test_error),
            r.wall_time_secs,
            r.note.as_deref().unwrap_or("")
        );
    }
    Ok(())
}
