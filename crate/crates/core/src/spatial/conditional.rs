use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{dot, SpdFactor};

/// Mean and variance of `Z_0` given `Z_1..Z_n = observed` under a joint normal.
///
/// Index 0 of `mean` and `cov` is the focal location.
pub fn conditional_normal(mean: &[f64], cov: MatRef<'_, f64>, observed: &[f64]) -> Result<(f64, f64)> {
    let n1 = mean.len();
    if n1 == 0 {
        return Err(Error::InvalidInput("conditional_normal needs at least the focal location".into()));
    }
    if cov.nrows() != n1 || cov.ncols() != n1 {
        return Err(Error::LengthMismatch(cov.nrows(), n1));
    }
    if observed.len() + 1 != n1 {
        return Err(Error::LengthMismatch(observed.len(), n1 - 1));
    }
    let n = n1 - 1;
    let sigma0 = cov[(0, 0)];
    if n == 0 {
        return Ok((mean[0], sigma0));
    }
    let sigma_oo = Mat::from_fn(n, n, |i, j| cov[(i + 1, j + 1)]);
    let cross: Vec<f64> = (0..n).map(|i| cov[(i + 1, 0)]).collect();
    let factor = SpdFactor::new(sigma_oo.as_ref(), "observed covariance")?;
    let weights = factor.solve_vec(&cross);
    let resid: Vec<f64> = (0..n).map(|i| observed[i] - mean[i + 1]).collect();
    let mu = mean[0] + dot(&weights, &resid);
    let var = sigma0 - dot(&weights, &cross);
    if var < -1e-8 * sigma0.abs().max(1.0) {
        return Err(Error::NotPositiveDefinite("joint covariance".into()));
    }
    Ok((mu, var.max(0.0)))
}
