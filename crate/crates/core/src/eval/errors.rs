use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::mat_vec;
use crate::model::{Fit, ThetaMemo, ThetaState};

/// Fraction of disagreeing labels.
pub fn test_error(predictions: &[u8], truth: &[u8]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch(predictions.len(), truth.len()));
    }
    if truth.is_empty() {
        return Err(Error::InvalidInput("no labels to compare".into()));
    }
    let wrong = predictions.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// Training-site predictions and the resulting error rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPrediction {
    /// Fraction of draws with a positive latent, per training site.
    pub p1: Vec<f64>,
    pub labels: Vec<u8>,
    pub rate: f64,
}

fn finish(counts: Vec<usize>, draws: usize, truth: &[u8]) -> Result<TrainingPrediction> {
    let p1: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
    let labels: Vec<u8> = p1.iter().map(|&p| u8::from(p > 0.5)).collect();
    let rate = test_error(&labels, truth)?;
    Ok(TrainingPrediction { p1, labels, rate })
}

fn check_fit(fit: &Fit) -> Result<()> {
    let s = &fit.samples;
    if s.is_empty() {
        return Err(Error::EmptyChain);
    }
    if s.z_train.len() != s.len() {
        return Err(Error::InvalidInput("training latent draws were not stored for this fit".into()));
    }
    Ok(())
}

/// Each training latent redrawn from its conditional given the other sites'
/// stored latents, once per retained iteration.
pub fn one_at_a_time_training_error<R: Rng + ?Sized>(fit: &Fit, rng: &mut R) -> Result<TrainingPrediction> {
    check_fit(fit)?;
    let memo = ThetaMemo::new(&fit.artifacts.covariance);
    one_at_a_time_with(fit, &memo, rng)
}

fn one_at_a_time_with<R: Rng + ?Sized>(fit: &Fit, memo: &ThetaMemo<'_>, rng: &mut R) -> Result<TrainingPrediction> {
    let x = fit.artifacts.train_design();
    let mut counts = vec![0usize; x.nrows()];
    for t in 0..fit.samples.len() {
        let (rho, kappa) = fit.theta_at(t);
        let state = memo.get(rho, kappa)?;
        one_at_a_time_draw(fit, t, &state, &x, &mut counts, rng);
    }
    finish(counts, fit.samples.len(), &fit.artifacts.y_train)
}

fn one_at_a_time_draw<R: Rng + ?Sized>(fit: &Fit, t: usize, state: &ThetaState, x: &Mat<f64>, counts: &mut [usize], rng: &mut R) {
    let s = &fit.samples;
    let xb = mat_vec(x.as_ref(), &s.beta[t]);
    match state.precision() {
        None => {
            for (i, c) in counts.iter_mut().enumerate() {
                let eps: f64 = StandardNormal.sample(rng);
                *c += usize::from(xb[i] + eps > 0.0);
            }
        }
        Some(q) => {
            let r: Vec<f64> = s.z_train[t].iter().zip(&xb).map(|(a, b)| a - b).collect();
            let qr = mat_vec(q.as_ref(), &r);
            for (i, c) in counts.iter_mut().enumerate() {
                let qii = q[(i, i)];
                let mean = xb[i] + r[i] - qr[i] / qii;
                let eps: f64 = StandardNormal.sample(rng);
                *c += usize::from(mean + eps / qii.sqrt() > 0.0);
            }
        }
    }
}

/// A fresh joint latent vector per retained iteration, ignoring the observed labels.
pub fn joint_training_error<R: Rng + ?Sized>(fit: &Fit, rng: &mut R) -> Result<TrainingPrediction> {
    if fit.samples.is_empty() {
        return Err(Error::EmptyChain);
    }
    let memo = ThetaMemo::new(&fit.artifacts.covariance);
    let x = fit.artifacts.train_design();
    let mut counts = vec![0usize; x.nrows()];
    for t in 0..fit.samples.len() {
        let (rho, kappa) = fit.theta_at(t);
        let state = memo.get(rho, kappa)?;
        joint_draw(fit, t, &state, &x, &mut counts, rng);
    }
    finish(counts, fit.samples.len(), &fit.artifacts.y_train)
}

fn joint_draw<R: Rng + ?Sized>(fit: &Fit, t: usize, state: &ThetaState, x: &Mat<f64>, counts: &mut [usize], rng: &mut R) {
    let xb = mat_vec(x.as_ref(), &fit.samples.beta[t]);
    let u: Vec<f64> = (0..counts.len()).map(|_| StandardNormal.sample(rng)).collect();
    let dev = match state.factor() {
        None => u,
        Some(f) => f.mul_lower(&u),
    };
    for (i, c) in counts.iter_mut().enumerate() {
        *c += usize::from(xb[i] + dev[i] > 0.0);
    }
}

/// Both training errors from one pass over the retained draws.
pub fn training_errors<R: Rng + ?Sized>(fit: &Fit, rng: &mut R) -> Result<(TrainingPrediction, TrainingPrediction)> {
    check_fit(fit)?;
    let memo = ThetaMemo::new(&fit.artifacts.covariance);
    let x = fit.artifacts.train_design();
    let mut oaat = vec![0usize; x.nrows()];
    let mut joint = vec![0usize; x.nrows()];
    for t in 0..fit.samples.len() {
        let (rho, kappa) = fit.theta_at(t);
        let state = memo.get(rho, kappa)?;
        one_at_a_time_draw(fit, t, &state, &x, &mut oaat, rng);
        joint_draw(fit, t, &state, &x, &mut joint, rng);
    }
    let y = &fit.artifacts.y_train;
    Ok((finish(oaat, fit.samples.len(), y)?, finish(joint, fit.samples.len(), y)?))
}

/// Posterior predictive labels at the fit's prediction sites from the stored test latents.
pub fn posterior_predictive_labels(fit: &Fit) -> Result<(Vec<f64>, Vec<u8>)> {
    let s = &fit.samples;
    if s.is_empty() {
        return Err(Error::EmptyChain);
    }
    let m = fit.artifacts.test().len();
    let mut counts = vec![0usize; m];
    for z in &s.z_test {
        for (c, v) in counts.iter_mut().zip(z) {
            *c += usize::from(*v > 0.0);
        }
    }
    let p1: Vec<f64> = counts.iter().map(|&c| c as f64 / s.len() as f64).collect();
    let labels = p1.iter().map(|&p| u8::from(p > 0.5)).collect();
    Ok((p1, labels))
}
