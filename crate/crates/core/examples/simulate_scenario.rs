//! Simulates every linear component on a 20 x 20 grid and summarises the draws.

use spatial_classify::eval::{clustered_test_split, join_concordance, simulate_dataset, test_fraction, LinearComponent, Scenario};

fn main() -> spatial_classify::Result<()> {
    let components = [
        LinearComponent::Intercept,
        LinearComponent::Simple1,
        LinearComponent::Simple2,
        LinearComponent::Multiple,
        LinearComponent::Confounded,
    ];
    println!("{:<12} {:>6} {:>8} {:>12} {:>10}", "component", "kappa", "ones", "concordance", "held out");
    for component in components {
        for kappa in [0.0, 0.5, 1.0] {
            let sc = Scenario::new(component, kappa, 11);
            let sim = simulate_dataset(&sc, &mut sc.stream().rng())?;
            let data = &sim.data;
            let mask = clustered_test_split(&data.domain().expect("full grid"), 25, 4, &mut sc.stream().child(1).rng())?;
            let ones = data.y.iter().flatten().filter(|&&v| v == 1).count();
            println!(
                "{:<12} {:>6.2} {:>8} {:>12.3} {:>10.3}",
                component.tag(),
                kappa,
                ones,
                join_concordance(data),
                test_fraction(&mask)
            );
        }
    }
    Ok(())
}
