//! Lattice neighbourhoods, CAR dependence, Gaussian conditioning and the Moran operator.

mod car;
mod conditional;
mod correlation;
mod grid;
mod moran;

pub use car::{assemble_sigma_star, car_dependence, CarSpectrum};
pub use conditional::conditional_normal;
pub use correlation::{distance, exponential_correlation};
pub use grid::{build_grid_neighbors, GridDomain, NeighborOrder, NeighborhoodMatrix};
pub use moran::{default_rank, moran_operator, moran_operator_rank, rank_for_fraction, MoranBasis};

use serde::{Deserialize, Serialize};

/// Covariance family and parameters for a latent field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CovarianceSpec {
    Car { rho: f64, kappa: f64, gamma2: f64 },
    Exponential { range: f64, kappa: f64, gamma2: f64 },
    Identity { gamma2: f64 },
}

impl CovarianceSpec {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: String| Err(crate::Error::InvalidInput(m));
        let (kappa, gamma2) = match *self {
            CovarianceSpec::Car { rho, kappa, gamma2 } => {
                if !(0.0..1.0).contains(&rho) {
                    return bad(format!("rho must lie in [0, 1), got {rho}"));
                }
                (kappa, gamma2)
            }
            CovarianceSpec::Exponential { range, kappa, gamma2 } => {
                if !(range > 0.0) {
                    return bad(format!("range must be positive, got {range}"));
                }
                (kappa, gamma2)
            }
            CovarianceSpec::Identity { gamma2 } => (0.0, gamma2),
        };
        if !(0.0..=1.0).contains(&kappa) {
            return bad(format!("kappa must lie in [0, 1], got {kappa}"));
        }
        if !(gamma2 > 0.0) {
            return bad(format!("gamma2 must be positive, got {gamma2}"));
        }
        Ok(())
    }

    /// Dense `Sigma*` over the given points or neighbourhood.
    pub fn matrix(&self, neighbors: Option<&NeighborhoodMatrix>, points: &[[f64; 2]]) -> crate::Result<faer::Mat<f64>> {
        self.validate()?;
        match *self {
            CovarianceSpec::Car { rho, kappa, gamma2 } => {
                let nb = neighbors.ok_or_else(|| crate::Error::InvalidInput("CAR covariance needs a neighbourhood".into()))?;
                let k = car_dependence(nb.weights().as_ref(), rho)?;
                assemble_sigma_star(k.as_ref(), kappa, gamma2)
            }
            CovarianceSpec::Exponential { range, kappa, gamma2 } => {
                let k = exponential_correlation(points, range)?;
                assemble_sigma_star(k.as_ref(), kappa, gamma2)
            }
            CovarianceSpec::Identity { gamma2 } => {
                let n = points.len();
                Ok(faer::Mat::from_fn(n, n, |i, j| if i == j { gamma2 } else { 0.0 }))
            }
        }
    }
}
