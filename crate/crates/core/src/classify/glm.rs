use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use super::score::{ClassifierKind, DecisionScore};
use crate::error::{Error, Result};
use crate::linalg::{dot, SpdFactor};
use crate::sampler::{norm_cdf, norm_pdf, norm_sf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Logit,
    Probit,
}

impl Link {
    fn kind(self) -> ClassifierKind {
        match self {
            Link::Logit => ClassifierKind::GlmLogit,
            Link::Probit => ClassifierKind::GlmProbit,
        }
    }

    /// `(p, 1 - p)` computed without cancellation.
    fn probs(self, eta: f64) -> (f64, f64) {
        match self {
            Link::Logit => {
                if eta >= 0.0 {
                    let e = (-eta).exp();
                    (1.0 / (1.0 + e), e / (1.0 + e))
                } else {
                    let e = eta.exp();
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                }
            }
            Link::Probit => (norm_cdf(eta), norm_sf(eta)),
        }
    }

    fn density(self, eta: f64) -> f64 {
        match self {
            Link::Logit => {
                let (p, q) = self.probs(eta);
                p * q
            }
            Link::Probit => norm_pdf(eta),
        }
    }
}

/// Maximum likelihood GLM fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    pub link: Link,
    pub beta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub deviance: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 100;
const GRAD_TOL: f64 = 1e-8;
const SEPARATION_NORM: f64 = 1e3;

fn deviance(y: &[u8], x: MatRef<'_, f64>, beta: &[f64], link: Link) -> f64 {
    let mut dev = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let eta: f64 = (0..beta.len()).map(|j| x[(i, j)] * beta[j]).sum();
        let (p, q) = link.probs(eta);
        let pr = if yi == 1 { p } else { q };
        dev -= 2.0 * pr.max(1e-300).ln();
    }
    dev
}

/// Score vector and Fisher information at `beta`.
fn score_and_information(y: &[u8], x: MatRef<'_, f64>, beta: &[f64], link: Link) -> (Vec<f64>, Mat<f64>) {
    let p = beta.len();
    let mut grad = vec![0.0; p];
    let mut info = Mat::<f64>::zeros(p, p);
    for (i, &yi) in y.iter().enumerate() {
        let row: Vec<f64> = (0..p).map(|j| x[(i, j)]).collect();
        let eta = dot(&row, beta);
        let (pr, qr) = link.probs(eta);
        let d = link.density(eta);
        let pq = (pr * qr).max(1e-300);
        let resid = f64::from(yi) - pr;
        let s = resid * d / pq;
        let w = d * d / pq;
        for a in 0..p {
            grad[a] += s * row[a];
            for b in 0..=a {
                info[(a, b)] += w * row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    (grad, info)
}

/// Fisher-scoring (Newton for the logit) with step halving.
pub fn fit_glm_mle(y: &[u8], x: MatRef<'_, f64>, link: Link) -> Result<GlmFit> {
    let n = y.len();
    let p = x.ncols();
    if x.nrows() != n {
        return Err(Error::LengthMismatch(x.nrows(), n));
    }
    if n <= p {
        return Err(Error::InvalidInput(format!("need more observations ({n}) than coefficients ({p})")));
    }
    let mut beta = vec![0.0; p];
    let mut dev = deviance(y, x, &beta, link);
    for iter in 1..=MAX_ITER {
        let (grad, info) = score_and_information(y, x, &beta, link);
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < GRAD_TOL {
            return finish(y, x, beta, link, dev, iter - 1);
        }
        let factor = SpdFactor::new(info.as_ref(), "Fisher information").map_err(|_| Error::Separation)?;
        let step = factor.solve_vec(&grad);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + scale * s).collect();
            let cand_dev = deviance(y, x, &cand, link);
            if cand_dev <= dev + 1e-12 * dev.abs().max(1.0) {
                beta = cand;
                dev = cand_dev;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
        let norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        if norm > SEPARATION_NORM || perfectly_fitted(y, x, &beta, link) {
            return Err(Error::Separation);
        }
    }
    let (grad, _) = score_and_information(y, x, &beta, link);
    if grad.iter().all(|g| g.abs() < 1e-6) {
        return finish(y, x, beta, link, dev, MAX_ITER);
    }
    Err(Error::Separation)
}

fn perfectly_fitted(y: &[u8], x: MatRef<'_, f64>, beta: &[f64], link: Link) -> bool {
    y.iter().enumerate().all(|(i, &yi)| {
        let eta: f64 = (0..beta.len()).map(|j| x[(i, j)] * beta[j]).sum();
        let (p, q) = link.probs(eta);
        let miss = if yi == 1 { q } else { p };
        miss < 1e-6
    })
}

fn finish(y: &[u8], x: MatRef<'_, f64>, beta: Vec<f64>, link: Link, deviance: f64, iterations: usize) -> Result<GlmFit> {
    let (_, info) = score_and_information(y, x, &beta, link);
    let cov = SpdFactor::new(info.as_ref(), "Fisher information")?.inverse();
    let std_errors = (0..beta.len()).map(|j| cov[(j, j)].sqrt()).collect();
    Ok(GlmFit {
        link,
        beta,
        std_errors,
        deviance,
        iterations,
    })
}

/// `delta = exp(x'beta)` for the logit, `Phi(x'beta) / (1 - Phi(x'beta))` for the probit.
pub fn decision_glm(x0: &[f64], beta: &[f64], link: Link) -> Result<DecisionScore> {
    if x0.len() != beta.len() {
        return Err(Error::LengthMismatch(x0.len(), beta.len()));
    }
    let eta = dot(x0, beta);
    Ok(match link {
        Link::Logit => DecisionScore::from_log_odds(eta, link.kind()),
        Link::Probit => {
            let (p, q) = link.probs(eta);
            DecisionScore {
                delta: p / q,
                p1: Some(p),
                source: link.kind(),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{standard_normal_vec, RngStream};
    use rand::Rng;

    #[test]
    fn decision_examples() {
        for link in [Link::Logit, Link::Probit] {
            let s = decision_glm(&[1.0], &[0.0], link).unwrap();
            assert!((s.delta - 1.0).abs() < 1e-15);
        }
        let s = decision_glm(&[1.0], &[3f64.ln()], Link::Logit).unwrap();
        assert!((s.delta - 3.0).abs() < 1e-12);
        let s = decision_glm(&[1.0], &[1.0], Link::Probit).unwrap();
        assert!((s.delta - 0.841_344_746_068_543 / 0.158_655_253_931_457).abs() < 1e-9);
        assert!((s.delta - 5.30).abs() < 0.01);
    }

    #[test]
    fn null_model_is_near_zero() {
        let mut rng = RngStream::new(51, 0).rng();
        let n = 500;
        let xs = standard_normal_vec(n, &mut rng);
        let y: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<bool>())).collect();
        let x = Mat::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
        for link in [Link::Logit, Link::Probit] {
            let fit = fit_glm_mle(&y, x.as_ref(), link).unwrap();
            for j in 0..2 {
                assert!(fit.beta[j].abs() < 3.0 * fit.std_errors[j], "{link:?} {fit:?}");
            }
        }
    }

    #[test]
    fn separable_data_detected() {
        let x = Mat::from_fn(20, 2, |i, j| if j == 0 { 1.0 } else { i as f64 - 9.5 });
        let y: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        for link in [Link::Logit, Link::Probit] {
            assert!(matches!(fit_glm_mle(&y, x.as_ref(), link), Err(Error::Separation)));
        }
    }

    #[test]
    fn logistic_recovers_truth() {
        let mut rng = RngStream::new(52, 0).rng();
        let n = 2000;
        let truth = [0.5, -1.0, 2.0];
        let x = Mat::from_fn(n, 3, |_, j| if j == 0 { 1.0 } else { 0.0 });
        let mut x = x;
        for i in 0..n {
            x[(i, 1)] = rng.random::<f64>() * 2.0 - 1.0;
            x[(i, 2)] = rng.random::<f64>() * 2.0 - 1.0;
        }
        let y: Vec<u8> = (0..n)
            .map(|i| {
                let eta: f64 = (0..3).map(|j| x[(i, j)] * truth[j]).sum();
                u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))
            })
            .collect();
        let fit = fit_glm_mle(&y, x.as_ref(), Link::Logit).unwrap();
        for j in 0..3 {
            assert!((fit.beta[j] - truth[j]).abs() < 3.0 * fit.std_errors[j]);
        }
    }
}
