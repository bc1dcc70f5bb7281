use serde::{Deserialize, Serialize};

use super::gls::{correlation_factor, gls};
use super::variogram::{theta_or_default, variogram_fit_multi};
use super::window::CovariateField;
use crate::classify::{ClassifierKind, DecisionScore};
use crate::error::{Error, Result};
use crate::linalg::{mat_from_rows, mat_to_rows, SpdFactor};
use crate::model::Dataset;
use crate::spatial::exponential_correlation;

/// Number of neighbours in the 3 x 3 window.
pub const MARDIA_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MardiaClass {
    pub prior: f64,
    pub mu: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MardiaParams {
    pub classes: [MardiaClass; 2],
    pub window: usize,
    pub shared_cov: bool,
}

/// GLS mean and covariance (divisor `n_j`) of one class; `theta = None` means `K = I`.
pub fn mardia_estimate(x: &[Vec<f64>], points: &[[f64; 2]], theta: Option<f64>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if x.len() != points.len() {
        return Err(Error::LengthMismatch(x.len(), points.len()));
    }
    let f = correlation_factor(points, theta)?;
    let ones = faer::Mat::from_fn(x.len(), 1, |_, _| 1.0);
    let (b, s) = gls(&ones, x, f.as_ref())?;
    let n = x.len() as f64;
    let mu = (0..b.ncols()).map(|j| b[(0, j)]).collect();
    Ok((mu, mat_to_rows((s * (1.0 / n)).as_ref())))
}

fn class_data(data: &Dataset, field: &CovariateField, class: u8) -> Result<(Vec<Vec<f64>>, Vec<[f64; 2]>)> {
    let idx: Vec<usize> = data
        .train_indices()
        .into_iter()
        .filter(|&i| data.y[i] == Some(class))
        .collect();
    if idx.len() < 2 {
        return Err(Error::DegenerateResponse(data.train_indices().len(), 1 - class));
    }
    Ok((
        idx.iter().map(|&i| field.rows[i].clone()).collect(),
        idx.iter().map(|&i| field.point(i)).collect(),
    ))
}

pub fn mardia_fit(data: &Dataset, shared_cov: bool) -> Result<MardiaParams> {
    let field = CovariateField::from_dataset(data)?;
    let c0 = class_data(data, &field, 0)?;
    let c1 = class_data(data, &field, 1)?;
    let n0 = c0.0.len() as f64;
    let n1 = c1.0.len() as f64;
    let thetas = if shared_cov {
        let xs: Vec<Vec<f64>> = c0.0.iter().chain(&c1.0).cloned().collect();
        let ps: Vec<[f64; 2]> = c0.1.iter().chain(&c1.1).copied().collect();
        let t = theta_or_default(variogram_fit_multi(&xs, &ps), "Mardia variogram");
        [t, t]
    } else {
        [
            theta_or_default(variogram_fit_multi(&c0.0, &c0.1), "Mardia class 0 variogram"),
            theta_or_default(variogram_fit_multi(&c1.0, &c1.1), "Mardia class 1 variogram"),
        ]
    };
    let (mu0, mut l0) = mardia_estimate(&c0.0, &c0.1, Some(thetas[0]))?;
    let (mu1, mut l1) = mardia_estimate(&c1.0, &c1.1, Some(thetas[1]))?;
    if shared_cov {
        let pooled: Vec<Vec<f64>> = l0
            .iter()
            .zip(&l1)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (n0 * u + n1 * v) / (n0 + n1)).collect())
            .collect();
        l0 = pooled.clone();
        l1 = pooled;
    }
    let n = n0 + n1;
    let params = MardiaParams {
        classes: [
            MardiaClass { prior: n0 / n, mu: mu0, lambda: l0, theta: thetas[0] },
            MardiaClass { prior: n1 / n, mu: mu1, lambda: l1, theta: thetas[1] },
        ],
        window: MARDIA_WINDOW,
        shared_cov,
    };
    for c in &params.classes {
        SpdFactor::new(mat_from_rows(&c.lambda).as_ref(), "Mardia covariance")?;
    }
    Ok(params)
}

/// `S_j` for a window `X*` (focal first) located at `points`.
pub fn mardia_score(class: &MardiaClass, xstar: &[Vec<f64>], points: &[[f64; 2]]) -> Result<f64> {
    if xstar.len() != points.len() || xstar.is_empty() {
        return Err(Error::LengthMismatch(xstar.len(), points.len()));
    }
    let l = class.mu.len();
    let m = xstar.len() as f64;
    let k0 = exponential_correlation(points, class.theta)?;
    SpdFactor::new(k0.as_ref(), "window correlation")?;
    let colsum: Vec<f64> = (0..xstar.len()).map(|c| (0..xstar.len()).map(|r| k0[(r, c)]).sum()).collect();
    let psi2: f64 = colsum.iter().sum();
    let g: Vec<f64> = (0..l).map(|a| colsum.iter().zip(xstar).map(|(w, x)| w * x[a]).sum()).collect();
    let lam = SpdFactor::new(mat_from_rows(&class.lambda).as_ref(), "Mardia covariance")?;
    let r: Vec<f64> = g.iter().zip(&class.mu).map(|(gv, mv)| gv - psi2 * mv).collect();
    Ok(class.prior.ln() - 0.5 * m * lam.log_det() + l as f64 * m * 0.5 * psi2.ln() - lam.quad_form(&r) / (2.0 * psi2))
}

/// `delta = exp(S1 - S0)`.
pub fn mardia_decision(params: &MardiaParams, xstar: &[Vec<f64>], points: &[[f64; 2]]) -> Result<DecisionScore> {
    let s0 = mardia_score(&params.classes[0], xstar, points)?;
    let s1 = mardia_score(&params.classes[1], xstar, points)?;
    Ok(DecisionScore::from_delta((s1 - s0).exp(), ClassifierKind::Mardia))
}

pub fn mardia_classify(params: &MardiaParams, field: &CovariateField, site: usize) -> Result<DecisionScore> {
    let w = field.window(site);
    mardia_decision(params, &w.covariates, &w.points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(prior: f64, mu: f64, theta: f64) -> MardiaClass {
        MardiaClass { prior, mu: vec![mu, 0.0], lambda: vec![vec![1.0, 0.3], vec![0.3, 2.0]], theta }
    }

    #[test]
    fn symmetric_classes_tie() {
        let p = MardiaParams { classes: [class(0.5, 1.0, 1e-3), class(0.5, 1.0, 1e-3)], window: 8, shared_cov: true };
        let pts: Vec<[f64; 2]> = (0..9).map(|i| [(i / 3) as f64, (i % 3) as f64]).collect();
        let x: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64 * 0.1, -0.2]).collect();
        assert!((mardia_decision(&p, &x, &pts).unwrap().delta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_cell_is_scalar_density() {
        let c = MardiaClass { prior: 0.3, mu: vec![0.4], lambda: vec![vec![2.5]], theta: 1.0 };
        let x = 1.7;
        let s = mardia_score(&c, &[vec![x]], &[[0.0, 0.0]]).unwrap();
        let logpdf = -0.5 * (2.0 * std::f64::consts::PI * 2.5).ln() - (x - 0.4) * (x - 0.4) / (2.0 * 2.5);
        let hand = 0.3f64.ln() + logpdf + 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((s - hand).abs() < 1e-12);
    }

    #[test]
    fn identity_gls_is_ordinary_mean() {
        let x: Vec<Vec<f64>> = (0..7).map(|i| vec![(i * i) as f64 * 0.3, (i as f64).sin()]).collect();
        let pts: Vec<[f64; 2]> = (0..7).map(|i| [i as f64, 0.0]).collect();
        let (mu, lam) = mardia_estimate(&x, &pts, None).unwrap();
        for a in 0..2 {
            let m = x.iter().map(|r| r[a]).sum::<f64>() / 7.0;
            assert!((mu[a] - m).abs() < 1e-10);
            for b in 0..2 {
                let mb = x.iter().map(|r| r[b]).sum::<f64>() / 7.0;
                let s = x.iter().map(|r| (r[a] - m) * (r[b] - mb)).sum::<f64>() / 7.0;
                assert!((lam[a][b] - s).abs() < 1e-10);
            }
        }
        let (mu_s, _) = mardia_estimate(&x, &pts, Some(2.0)).unwrap();
        assert!((mu_s[0] - mu[0]).abs() > 1e-6);
    }
}
