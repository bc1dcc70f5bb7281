//! Switzer, Mardia, spatial LDA and Press on a dataset with spatially smooth covariates.

use spatial_classify::classify::ClassifierKind;
use spatial_classify::eval::{clustered_test_split, run_classifier, simulate_dataset, HarnessConfig, LinearComponent, Scenario};
use spatial_classify::model::McmcConfig;
use spatial_classify::spatial_alt::{variogram_fit, THETA_MAX, THETA_MIN};

fn main() -> spatial_classify::Result<()> {
    let mut sc = Scenario::new(LinearComponent::Confounded, 1.0, 17).with_grid(12, 12);
    sc.rho = 0.95;
    let mut data = simulate_dataset(&sc, &mut sc.stream().rng())?.data;
    data.test_mask = clustered_test_split(&data.domain().expect("grid"), 9, 4, &mut sc.stream().child(1).rng())?;

    let x1: Vec<f64> = (0..data.n()).map(|i| data.covariate_row(i)[0]).collect();
    let theta = variogram_fit(&x1, &data.points())?;
    println!("variogram range of x1: {theta:.2} (search interval {THETA_MIN}..{THETA_MAX})");

    let kinds = [ClassifierKind::Lda, ClassifierKind::Switzer, ClassifierKind::Mardia, ClassifierKind::SpatialLda, ClassifierKind::Press];
    let cfg = HarnessConfig::new(kinds.to_vec(), McmcConfig::new(1000, 500, 6), 6);
    for kind in kinds {
        let r = run_classifier(kind, &data, &cfg).report;
        println!(
            "{:<12} train {:.3} test {:.3} {}",
            kind.tag(),
            r.training_error.unwrap_or(f64::NAN),
            r.test_error.unwrap_or(f64::NAN),
            r.note.unwrap_or_default()
        );
    }
    Ok(())
}
