use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior covariance of the regression coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaCov {
    /// `v I`.
    Isotropic(f64),
    Full(Vec<Vec<f64>>),
}

/// Priors shared by the latent-variable samplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub beta_cov: BetaCov,
    pub gamma_df: f64,
    pub gamma_scale: f64,
    pub rho_bounds: (f64, f64),
    pub kappa_uniform: bool,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            beta_cov: BetaCov::Isotropic(10.0),
            gamma_df: 3.0,
            gamma_scale: 3.0,
            rho_bounds: (0.0, 1.0),
            kappa_uniform: true,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self, p: usize) -> Result<()> {
        if !(self.gamma_df > 0.0 && self.gamma_scale > 0.0) {
            return Err(Error::InvalidInput("gamma prior df and scale must be positive".into()));
        }
        let (a, b) = self.rho_bounds;
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::InvalidInput(format!("rho bounds must satisfy 0 <= a < b <= 1, got ({a}, {b})")));
        }
        let v = self.beta_cov_matrix(p)?;
        crate::linalg::SpdFactor::new(v.as_ref(), "beta prior covariance")
            .map_err(|_| Error::InvalidInput("beta prior covariance is not positive definite".into()))?;
        Ok(())
    }

    pub fn beta_cov_matrix(&self, p: usize) -> Result<Mat<f64>> {
        match &self.beta_cov {
            BetaCov::Isotropic(v) => {
                if !(*v > 0.0) {
                    return Err(Error::InvalidInput(format!("beta prior variance must be positive, got {v}")));
                }
                Ok(Mat::from_fn(p, p, |i, j| if i == j { *v } else { 0.0 }))
            }
            BetaCov::Full(rows) => {
                if rows.len() != p || rows.iter().any(|r| r.len() != p) {
                    return Err(Error::InvalidInput(format!("beta prior covariance must be {p}x{p}")));
                }
                Ok(crate::linalg::mat_from_rows(rows))
            }
        }
    }
}
