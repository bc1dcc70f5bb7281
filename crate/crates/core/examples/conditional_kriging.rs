//! Kriging one lattice cell from its neighbours under the CAR covariance.

use faer::Mat;
use spatial_classify::spatial::{build_grid_neighbors, conditional_normal, CarSpectrum, GridDomain, NeighborOrder};

fn main() -> spatial_classify::Result<()> {
    let domain = GridDomain::new(9, 9)?;
    let spectrum = CarSpectrum::new(&build_grid_neighbors(&domain, NeighborOrder::Second))?;
    let focal = domain.index(4, 4).expect("inside");
    let ring: Vec<usize> = (0..domain.len()).filter(|&i| i != focal).collect();
    let order: Vec<usize> = std::iter::once(focal).chain(ring.iter().copied()).collect();

    for rho in [0.0, 0.5, 0.9, 0.97] {
        let k = spectrum.dependence(rho)?;
        let cov = Mat::from_fn(order.len(), order.len(), |a, b| k[(order[a], order[b])]);
        let mean = vec![0.0; order.len()];
        let observed: Vec<f64> = ring.iter().map(|&i| if domain.coords()[i].1 < 4 { 1.0 } else { -0.5 }).collect();
        let (mu, var) = conditional_normal(&mean, cov.as_ref(), &observed)?;
        println!("rho {rho:.2}: prior var {:.3}, conditional mean {mu:+.3}, var {var:.3}", k[(focal, focal)]);
    }
    Ok(())
}
