use super::score::{ClassifierKind, DecisionScore};
use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec};
use crate::model::{Fit, ModelKind};
use crate::sampler::{norm_cdf, norm_sf};

fn model_kind(model: ModelKind) -> ClassifierKind {
    match model {
        ModelKind::Sglm => ClassifierKind::Sglm,
        ModelKind::Sglmm => ClassifierKind::Sglmm,
        ModelKind::IndependentProbit => ClassifierKind::BayesProbit,
        ModelKind::LowRank => ClassifierKind::LowRank,
    }
}

/// Probit score for a latent `N(mean, var)`: `p1 = Phi(mean / sd)`.
fn probit_score(mean: f64, var: f64, source: ClassifierKind) -> DecisionScore {
    if var <= 0.0 {
        let p1 = if mean > 0.0 {
            1.0
        } else if mean < 0.0 {
            0.0
        } else {
            0.5
        };
        return DecisionScore::from_probability(p1, source);
    }
    let t = mean / var.sqrt();
    let (p, q) = (norm_cdf(t), norm_sf(t));
    DecisionScore {
        delta: p / q,
        p1: Some(p),
        source,
    }
}

fn column_means(draws: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = draws.first().ok_or(Error::EmptyChain)?;
    let t = draws.len() as f64;
    let mut out = vec![0.0; first.len()];
    for d in draws {
        for (o, v) in out.iter_mut().zip(d) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|o| *o /= t);
    Ok(out)
}

/// Plug-in probit rule at the posterior mean of `beta` draws.
pub fn posterior_mean_probit(beta_draws: &[Vec<f64>], x0: &[f64]) -> Result<DecisionScore> {
    let beta = column_means(beta_draws)?;
    if beta.len() != x0.len() {
        return Err(Error::LengthMismatch(x0.len(), beta.len()));
    }
    Ok(probit_score(dot(x0, &beta), 1.0, ClassifierKind::BayesProbit))
}

/// Plug-in rule for a fitted latent model at location `focal`.
///
/// Coefficients, covariance parameters and training latents are replaced by
/// their posterior means; the latent at `focal` is then normal given the
/// averaged training latents.
pub fn posterior_mean_classifier(fit: &Fit, focal: usize) -> Result<DecisionScore> {
    let s = &fit.samples;
    if s.is_empty() {
        return Err(Error::EmptyChain);
    }
    let art = &fit.artifacts;
    let n = art.design.nrows();
    if focal >= n {
        return Err(Error::IndexOutOfRange { index: focal, len: n });
    }
    let source = model_kind(s.meta.model);
    let beta = s.beta_mean()?;
    let t = s.len() as f64;
    let (mut rho, mut kappa) = (0.0, 0.0);
    for i in 0..s.len() {
        let (r, k) = fit.theta_at(i);
        rho += r / t;
        kappa += k / t;
    }
    let x0 = art.design_row(focal);
    let mean0 = dot(&x0, &beta);
    if s.z_train.len() != s.len() {
        return Err(Error::InvalidInput("training latent draws were not stored for this fit".into()));
    }
    let z = column_means(&s.z_train)?;
    let xb = mat_vec(art.train_design().as_ref(), &beta);
    let r: Vec<f64> = z.iter().zip(&xb).map(|(a, b)| a - b).collect();
    let mut state = art.covariance.state(rho, kappa)?;
    art.covariance.finalize(&mut state)?;
    let (cross, var0) = art.covariance.site_covariance(&state, focal)?;
    let w = state.precision_times(&cross);
    let mean = mean0 + dot(&w, &r);
    let var = (var0 - dot(&w, &cross)).max(0.0);
    Ok(probit_score(mean, var, source))
}

/// `p1` as the fraction of latent draws above zero.
pub fn posterior_predictive_from_latent(z0: &[f64], source: ClassifierKind) -> Result<DecisionScore> {
    if z0.is_empty() {
        return Err(Error::EmptyChain);
    }
    let ones = z0.iter().filter(|&&z| z > 0.0).count();
    Ok(DecisionScore::from_probability(ones as f64 / z0.len() as f64, source))
}

/// `p1` as the fraction of label draws equal to one.
pub fn posterior_predictive_from_labels(y0: &[u8], source: ClassifierKind) -> Result<DecisionScore> {
    if y0.is_empty() {
        return Err(Error::EmptyChain);
    }
    let ones = y0.iter().filter(|&&y| y == 1).count();
    Ok(DecisionScore::from_probability(ones as f64 / y0.len() as f64, source))
}

/// Posterior predictive rule at a held-out or unobserved location of the fit.
pub fn posterior_predictive_classifier(fit: &Fit, focal: usize) -> Result<DecisionScore> {
    let source = model_kind(fit.samples.meta.model);
    let Some(j) = fit.artifacts.test().iter().position(|&i| i == focal) else {
        return Err(Error::InvalidInput(format!("location {focal} is not a prediction location of this fit")));
    };
    let draws: Vec<f64> = fit.samples.z_test.iter().map(|z| z[j]).collect();
    posterior_predictive_from_latent(&draws, source)
}
