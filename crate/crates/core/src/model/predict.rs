use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::covariance::ThetaMemo;
use super::gibbs::Fit;
use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec};

/// One conditional draw of the latent at `focal` per retained iteration.
///
/// Each draw conditions on that iteration's training latents, coefficients and
/// covariance parameters. A focal site inside the training set reproduces its
/// own latent (zero conditional variance).
pub fn predict_latent<R: Rng + ?Sized>(fit: &Fit, focal: usize, rng: &mut R) -> Result<Vec<f64>> {
    let (means, vars) = latent_conditional_moments(fit, focal)?;
    Ok(means
        .iter()
        .zip(&vars)
        .map(|(m, v)| {
            let eps: f64 = StandardNormal.sample(rng);
            m + v.sqrt() * eps
        })
        .collect())
}

/// Per-iteration conditional mean and variance of the latent at `focal`.
pub fn latent_conditional_moments(fit: &Fit, focal: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let art = &fit.artifacts;
    let n = art.design.nrows();
    if focal >= n {
        return Err(Error::IndexOutOfRange { index: focal, len: n });
    }
    let s = &fit.samples;
    if s.is_empty() {
        return Err(Error::EmptyChain);
    }
    if s.z_train.len() != s.len() {
        return Err(Error::InvalidInput("training latent draws were not stored for this fit".into()));
    }
    let x_tr = art.train_design();
    let x0 = art.design_row(focal);
    let memo = ThetaMemo::new(&art.covariance);
    let mut means = Vec::with_capacity(s.len());
    let mut vars = Vec::with_capacity(s.len());
    for t in 0..s.len() {
        let (rho, kappa) = fit.theta_at(t);
        let state = memo.get(rho, kappa)?;
        let beta = &s.beta[t];
        let xb = mat_vec(x_tr.as_ref(), beta);
        let r: Vec<f64> = s.z_train[t].iter().zip(&xb).map(|(z, m)| z - m).collect();
        let (cross, var0) = art.covariance.site_covariance(&state, focal)?;
        let w = state.precision_times(&cross);
        means.push(dot(&x0, beta) + dot(&w, &r));
        vars.push((var0 - dot(&w, &cross)).max(0.0));
    }
    Ok((means, vars))
}
