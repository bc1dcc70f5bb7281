//! Moran eigenvector basis and the low-rank SGLMM against the full SGLM.

use std::time::Instant;

use spatial_classify::classify::ClassifierKind;
use spatial_classify::eval::{clustered_test_split, latent_run, simulate_dataset, LinearComponent, Scenario};
use spatial_classify::model::{fit_lowrank, fit_sglm, McmcConfig, PriorSpec};
use spatial_classify::sampler::RngStream;
use spatial_classify::spatial::{moran_operator, NeighborOrder};

fn main() -> spatial_classify::Result<()> {
    let mut sc = Scenario::new(LinearComponent::Simple1, 1.0, 8).with_grid(15, 15);
    sc.rho = 0.95;
    let mut data = simulate_dataset(&sc, &mut sc.stream().rng())?.data;
    data.test_mask = clustered_test_split(&data.domain().expect("grid"), 14, 4, &mut sc.stream().child(1).rng())?;

    let adjacency = data.neighbors(NeighborOrder::Second);
    let basis = moran_operator(data.x.as_ref(), adjacency.adjacency().as_ref())?;
    let leading: Vec<String> = basis.values.iter().take(6).map(|v| format!("{v:.3}")).collect();
    println!("rank {} basis, leading Moran eigenvalues {}", basis.vectors.ncols(), leading.join(" "));

    let cfg = McmcConfig::new(1500, 750, 2);
    let priors = PriorSpec::default();
    for (kind, frac) in [(ClassifierKind::LowRank, 0.05), (ClassifierKind::LowRank, 0.10), (ClassifierKind::Sglm, 0.0)] {
        let t = Instant::now();
        let fit = if kind == ClassifierKind::Sglm {
            fit_sglm(&data, &priors, &cfg)?
        } else {
            fit_lowrank(&data, &priors, frac, &cfg)?
        };
        let secs = t.elapsed().as_secs_f64();
        let run = latent_run(kind, &data, &fit, RngStream::new(2, 3))?;
        println!(
            "{:<8} r = {:<3} test {:.3}  {secs:.1}s",
            kind.tag(),
            fit.samples.meta.lowrank_rank.unwrap_or(0),
            run.report.test_error.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
