use faer::Mat;
use serde::{Deserialize, Serialize};

use super::gls::{correlation_factor, gls};
use super::variogram::{theta_or_default, variogram_fit_multi};
use super::window::CovariateField;
use crate::classify::{ClassifierKind, DecisionScore};
use crate::error::{Error, Result};
use crate::linalg::{mat_from_rows, mat_to_rows, SpdFactor};
use crate::model::Dataset;

/// Regressors `u` for the class means `mu_j = B_j' u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UBasis {
    Intercept,
    /// `(1, row, col)` with coordinates scaled to `[0, 1]`.
    Coordinates { rows: usize, cols: usize },
}

impl UBasis {
    pub fn q(self) -> usize {
        match self {
            UBasis::Intercept => 1,
            UBasis::Coordinates { .. } => 3,
        }
    }

    pub fn eval(self, (row, col): (usize, usize)) -> Vec<f64> {
        let scale = |v: usize, n: usize| if n > 1 { v as f64 / (n - 1) as f64 } else { 0.0 };
        match self {
            UBasis::Intercept => vec![1.0],
            UBasis::Coordinates { rows, cols } => vec![1.0, scale(row, rows), scale(col, cols)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialLdaParams {
    pub b0: Vec<Vec<f64>>,
    pub b1: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    /// `None` marks an identity correlation.
    pub theta0: Option<f64>,
    pub theta1: Option<f64>,
    pub pi0: f64,
    pub pi1: f64,
    pub u_basis: UBasis,
}

/// Training covariates, regressors and locations of one class.
#[derive(Debug, Clone)]
pub struct SldaClass {
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub points: Vec<[f64; 2]>,
    pub theta: Option<f64>,
}

/// GLS coefficients per class and the pooled covariance with divisor `n0 + n1`.
pub fn spatial_lda_estimate(classes: [&SldaClass; 2], u_basis: UBasis) -> Result<SpatialLdaParams> {
    let mut bs = Vec::with_capacity(2);
    let mut pooled: Option<Mat<f64>> = None;
    for c in classes {
        if c.x.len() < 2 {
            return Err(Error::InvalidInput("spatial LDA needs two observations per class".into()));
        }
        let f = correlation_factor(&c.points, c.theta)?;
        let (b, s) = gls(&mat_from_rows(&c.u), &c.x, f.as_ref())?;
        bs.push(b);
        pooled = Some(match pooled {
            None => s,
            Some(p) => p + s,
        });
    }
    let n0 = classes[0].x.len() as f64;
    let n1 = classes[1].x.len() as f64;
    let sigma = pooled.expect("two classes") * (1.0 / (n0 + n1));
    SpdFactor::new(sigma.as_ref(), "spatial LDA covariance")?;
    Ok(SpatialLdaParams {
        b0: mat_to_rows(bs[0].as_ref()),
        b1: mat_to_rows(bs[1].as_ref()),
        sigma: mat_to_rows(sigma.as_ref()),
        theta0: classes[0].theta,
        theta1: classes[1].theta,
        pi0: n0 / (n0 + n1),
        pi1: n1 / (n0 + n1),
        u_basis,
    })
}

pub fn spatial_lda_fit(data: &Dataset, u_basis: UBasis) -> Result<SpatialLdaParams> {
    let field = CovariateField::from_dataset(data)?;
    let train = data.train_indices();
    let build = |class: u8| -> Result<SldaClass> {
        let idx: Vec<usize> = train.iter().copied().filter(|&i| data.y[i] == Some(class)).collect();
        if idx.len() < 2 {
            return Err(Error::DegenerateResponse(train.len(), 1 - class));
        }
        let x: Vec<Vec<f64>> = idx.iter().map(|&i| field.rows[i].clone()).collect();
        let points: Vec<[f64; 2]> = idx.iter().map(|&i| field.point(i)).collect();
        let theta = theta_or_default(variogram_fit_multi(&x, &points), "spatial LDA variogram");
        Ok(SldaClass {
            u: idx.iter().map(|&i| u_basis.eval(data.coords[i])).collect(),
            x,
            points,
            theta: Some(theta),
        })
    };
    let c0 = build(0)?;
    let c1 = build(1)?;
    spatial_lda_estimate([&c0, &c1], u_basis)
}

fn mean_at(b: &[Vec<f64>], u0: &[f64]) -> Vec<f64> {
    (0..b[0].len()).map(|a| b.iter().zip(u0).map(|(row, u)| row[a] * u).sum()).collect()
}

pub fn spatial_lda_log_delta(params: &SpatialLdaParams, x0: &[f64], u0: &[f64]) -> Result<f64> {
    if u0.len() != params.b0.len() {
        return Err(Error::LengthMismatch(u0.len(), params.b0.len()));
    }
    let mu0 = mean_at(&params.b0, u0);
    let mu1 = mean_at(&params.b1, u0);
    if x0.len() != mu0.len() {
        return Err(Error::LengthMismatch(x0.len(), mu0.len()));
    }
    let f = SpdFactor::new(mat_from_rows(&params.sigma).as_ref(), "spatial LDA covariance")?;
    let diff: Vec<f64> = mu1.iter().zip(&mu0).map(|(a, b)| a - b).collect();
    let w = f.solve_vec(&diff);
    let centred: Vec<f64> = x0.iter().zip(mu0.iter().zip(&mu1)).map(|(x, (a, b))| x - 0.5 * (a + b)).collect();
    Ok(centred.iter().zip(&w).map(|(c, v)| c * v).sum::<f64>() + (params.pi1 / params.pi0).ln())
}

pub fn spatial_lda_decision(params: &SpatialLdaParams, x0: &[f64], u0: &[f64]) -> Result<DecisionScore> {
    Ok(DecisionScore::from_log_odds(spatial_lda_log_delta(params, x0, u0)?, ClassifierKind::SpatialLda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{decision_da, fit_discriminant, DaKind};
    use crate::sampler::{standard_normal_vec, RngStream};

    fn class(seed: u64, shift: f64, n: usize, theta: Option<f64>) -> SldaClass {
        let mut rng = RngStream::new(seed, 0).rng();
        let x = (0..n)
            .map(|_| standard_normal_vec(2, &mut rng).into_iter().map(|v| v + shift).collect())
            .collect();
        SldaClass {
            x,
            u: vec![vec![1.0]; n],
            points: (0..n).map(|i| [(i / 5) as f64, (i % 5) as f64 + seed as f64 * 10.0]).collect(),
            theta,
        }
    }

    #[test]
    fn identity_intercept_reduces_to_lda() {
        let c0 = class(1, 0.0, 14, None);
        let c1 = class(2, 1.0, 9, None);
        let p = spatial_lda_estimate([&c0, &c1], UBasis::Intercept).unwrap();
        let mut y = vec![0u8; 14];
        y.extend(vec![1u8; 9]);
        let x: Vec<Vec<f64>> = c0.x.iter().chain(&c1.x).cloned().collect();
        let mut lda = fit_discriminant(DaKind::Lda, &y, &x).unwrap();
        let n = 23.0;
        for l in [&mut lda.lambda0, &mut lda.lambda1] {
            l.iter_mut().flatten().for_each(|v| *v *= (n - 2.0) / n);
        }
        for x0 in [[0.3, -0.2], [2.0, 1.5], [-1.0, 0.7]] {
            let a = spatial_lda_log_delta(&p, &x0, &[1.0]).unwrap();
            let b = decision_da(&lda, &x0).unwrap().log_delta();
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn equal_coefficients_give_prior_ratio() {
        let c0 = class(3, 0.0, 12, Some(1.5));
        let p0 = spatial_lda_estimate([&c0, &class(4, 1.0, 8, Some(1.5))], UBasis::Intercept).unwrap();
        let p = SpatialLdaParams { b1: p0.b0.clone(), ..p0 };
        let s = spatial_lda_decision(&p, &[5.0, -3.0], &[1.0]).unwrap();
        assert!((s.delta - p.pi1 / p.pi0).abs() < 1e-12);
    }

    #[test]
    fn midpoint_is_boundary() {
        let p = SpatialLdaParams {
            b0: vec![vec![0.0, 0.0]],
            b1: vec![vec![2.0, 0.0]],
            sigma: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            theta0: None,
            theta1: None,
            pi0: 0.5,
            pi1: 0.5,
            u_basis: UBasis::Intercept,
        };
        assert!((spatial_lda_decision(&p, &[1.0, 7.0], &[1.0]).unwrap().delta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coordinate_basis_scaling() {
        let b = UBasis::Coordinates { rows: 5, cols: 3 };
        assert_eq!(b.eval((4, 1)), vec![1.0, 1.0, 0.5]);
        assert_eq!(b.q(), 3);
    }
}
