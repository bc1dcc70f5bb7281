//! One-at-a-time versus joint training error as the spatial fraction grows.

use spatial_classify::eval::{
    clustered_test_split, posterior_predictive_labels, simulate_dataset, test_error, training_errors, LinearComponent, Scenario,
};
use spatial_classify::model::{fit_sglm, fit_sglmm, KappaMode, McmcConfig, PriorSpec};

fn main() -> spatial_classify::Result<()> {
    println!("{:>6} {:>8} {:>8} {:>8}", "kappa", "oaat", "joint", "test");
    for kappa in [0.0, 0.5, 1.0] {
        let mut sc = Scenario::new(LinearComponent::Simple2, kappa, 21).with_grid(12, 12);
        sc.rho = 0.9;
        let mut data = simulate_dataset(&sc, &mut sc.stream().rng())?.data;
        data.test_mask = clustered_test_split(&data.domain().expect("grid"), 9, 4, &mut sc.stream().child(1).rng())?;
        let cfg = McmcConfig::new(1500, 750, 3);
        let fit = if kappa == 1.0 {
            fit_sglm(&data, &PriorSpec::default(), &cfg)?
        } else {
            fit_sglmm(&data, &PriorSpec::default(), &cfg, KappaMode::Sampled)?
        };
        let (oaat, joint) = training_errors(&fit, &mut cfg.rng.child(7).rng())?;

        let (_, labels) = posterior_predictive_labels(&fit)?;
        let truth = data.responses(fit.artifacts.test())?;
        let test = test_error(&labels, &truth)?;
        println!("{kappa:>6.2} {:>8.3} {:>8.3} {test:>8.3}", oaat.rate, joint.rate);
    }
    Ok(())
}
