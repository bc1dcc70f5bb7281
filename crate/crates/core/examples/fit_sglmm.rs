//! Fits the SGLMM to one simulated dataset and prints posterior summaries.

use spatial_classify::classify::ClassifierKind;
use spatial_classify::eval::{clustered_test_split, latent_run, simulate_dataset, LinearComponent, Scenario};
use spatial_classify::model::{fit_sglmm, KappaMode, McmcConfig, PriorSpec};
use spatial_classify::sampler::RngStream;

fn main() -> spatial_classify::Result<()> {
    let mut sc = Scenario::new(LinearComponent::Simple1, 0.75, 5).with_grid(12, 12);
    sc.rho = 0.9;
    let mut data = simulate_dataset(&sc, &mut sc.stream().rng())?.data;
    data.test_mask = clustered_test_split(&data.domain().expect("grid"), 9, 4, &mut sc.stream().child(1).rng())?;

    let cfg = McmcConfig::new(2000, 1000, 1);
    let fit = fit_sglmm(&data, &PriorSpec::default(), &cfg, KappaMode::Sampled)?;
    let s = &fit.samples;

    for (k, name) in ["intercept", "x1"].iter().enumerate() {
        let col = s.beta_column(k);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let (lo, hi) = s.beta_interval(k, 0.9)?;
        println!("{name:>10}: mean {mean:+.3}  90% ({lo:+.3}, {hi:+.3})");
    }
    let avg = |v: &Option<Vec<f64>>| v.as_ref().map(|v| v.iter().sum::<f64>() / v.len() as f64);
    println!("rho mean {:.3}, kappa mean {:.3}", avg(&s.rho).unwrap_or(0.0), avg(&s.kappa).unwrap_or(0.0));
    println!(
        "acceptance rho {:.2} kappa {:.2}, Geweke flagged: {}",
        s.meta.rho_acceptance.unwrap_or(0.0),
        s.meta.kappa_acceptance.unwrap_or(0.0),
        s.meta.geweke_flagged
    );
    for g in &s.meta.geweke {
        if let Some(z) = g.z {
            println!("  geweke {:<8} z = {z:+.2}", g.parameter);
        }
    }

    let run = latent_run(ClassifierKind::Sglmm, &data, &fit, RngStream::new(1, 9))?;
    println!("test error {:.3} on {} held-out sites", run.report.test_error.unwrap_or(f64::NAN), run.report.n_test);
    Ok(())
}
