use faer::Mat;
use serde::{Deserialize, Serialize};

use super::score::{ClassifierKind, DecisionScore};
use crate::error::{Error, Result};
use crate::linalg::{dot, mat_from_rows, mat_to_rows, mat_vec, SpdFactor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DaKind {
    Lda,
    Dlda,
    Qda,
}

impl DaKind {
    pub fn classifier(self) -> ClassifierKind {
        match self {
            DaKind::Lda => ClassifierKind::Lda,
            DaKind::Dlda => ClassifierKind::Dlda,
            DaKind::Qda => ClassifierKind::Qda,
        }
    }
}

/// Class priors, means and covariances of a Gaussian discriminant rule.
///
/// LDA and DLDA store the shared covariance in both `lambda0` and `lambda1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantParams {
    pub kind: DaKind,
    pub pi0: f64,
    pub pi1: f64,
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    pub lambda0: Vec<Vec<f64>>,
    pub lambda1: Vec<Vec<f64>>,
}

/// `log delta = alpha0 + x'alpha1 - x'alpha2 x`.
#[derive(Debug, Clone)]
pub struct DiscriminantCoefficients {
    pub alpha0: f64,
    pub alpha1: Vec<f64>,
    pub alpha2: Option<Mat<f64>>,
}

impl DiscriminantParams {
    /// Shared-covariance rule (LDA or DLDA).
    pub fn shared(kind: DaKind, pi1: f64, mu0: Vec<f64>, mu1: Vec<f64>, lambda: Vec<Vec<f64>>) -> Result<Self> {
        let p = Self {
            kind,
            pi0: 1.0 - pi1,
            pi1,
            mu0,
            mu1,
            lambda0: lambda.clone(),
            lambda1: lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn qda(pi1: f64, mu0: Vec<f64>, mu1: Vec<f64>, lambda0: Vec<Vec<f64>>, lambda1: Vec<Vec<f64>>) -> Result<Self> {
        let p = Self {
            kind: DaKind::Qda,
            pi0: 1.0 - pi1,
            pi1,
            mu0,
            mu1,
            lambda0,
            lambda1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.mu0.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pi1 > 0.0 && self.pi0 > 0.0 && (self.pi0 + self.pi1 - 1.0).abs() < 1e-12) {
            return Err(Error::InvalidInput(format!("class priors {} and {} are invalid", self.pi0, self.pi1)));
        }
        let d = self.dim();
        if self.mu1.len() != d {
            return Err(Error::LengthMismatch(self.mu1.len(), d));
        }
        for lam in [&self.lambda0, &self.lambda1] {
            if lam.len() != d || lam.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidInput(format!("covariance must be {d}x{d}")));
            }
        }
        if self.kind == DaKind::Dlda {
            for (i, row) in self.lambda0.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if (i == j && !(v > 0.0)) || (i != j && v != 0.0) {
                        return Err(Error::InvalidInput("diagonal covariance needs positive diagonal and zero off-diagonal".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn coefficients(&self) -> Result<DiscriminantCoefficients> {
        let log_prior = (self.pi1 / self.pi0).ln();
        match self.kind {
            DaKind::Lda | DaKind::Dlda => {
                let f = covariance_factor(&self.lambda0, "pooled covariance")?;
                let diff: Vec<f64> = self.mu1.iter().zip(&self.mu0).map(|(a, b)| a - b).collect();
                let alpha1 = f.solve_vec(&diff);
                let alpha0 = log_prior - 0.5 * (f.quad_form(&self.mu1) - f.quad_form(&self.mu0));
                Ok(DiscriminantCoefficients {
                    alpha0,
                    alpha1,
                    alpha2: None,
                })
            }
            DaKind::Qda => {
                let f0 = covariance_factor(&self.lambda0, "class-0 covariance")?;
                let f1 = covariance_factor(&self.lambda1, "class-1 covariance")?;
                let inv0 = f0.inverse();
                let inv1 = f1.inverse();
                let d = self.dim();
                let alpha2 = Mat::from_fn(d, d, |i, j| 0.5 * (inv1[(i, j)] - inv0[(i, j)]));
                let a1 = mat_vec(inv1.as_ref(), &self.mu1);
                let a0 = mat_vec(inv0.as_ref(), &self.mu0);
                let alpha1 = a1.iter().zip(&a0).map(|(a, b)| a - b).collect();
                let alpha0 = log_prior - 0.5 * f1.log_det() + 0.5 * f0.log_det() - 0.5 * dot(&self.mu1, &a1)
                    + 0.5 * dot(&self.mu0, &a0);
                Ok(DiscriminantCoefficients {
                    alpha0,
                    alpha1,
                    alpha2: Some(alpha2),
                })
            }
        }
    }
}

/// Cholesky factor, rejecting numerically singular covariances.
fn covariance_factor(rows: &[Vec<f64>], context: &str) -> Result<SpdFactor> {
    let f = SpdFactor::new(mat_from_rows(rows).as_ref(), context).map_err(|_| Error::Singular(context.into()))?;
    let l = f.lower();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..l.nrows() {
        lo = lo.min(l[(i, i)]);
        hi = hi.max(l[(i, i)]);
    }
    if !(lo > 1e-7 * hi) {
        return Err(Error::Singular(context.into()));
    }
    Ok(f)
}

impl DiscriminantCoefficients {
    pub fn log_delta(&self, x0: &[f64]) -> Result<f64> {
        if x0.len() != self.alpha1.len() {
            return Err(Error::LengthMismatch(x0.len(), self.alpha1.len()));
        }
        let quad = self.alpha2.as_ref().map_or(0.0, |a2| dot(x0, &mat_vec(a2.as_ref(), x0)));
        Ok(self.alpha0 + dot(x0, &self.alpha1) - quad)
    }
}

fn class_rows<'a>(y: &[u8], x: &'a [Vec<f64>], class: u8) -> Vec<&'a Vec<f64>> {
    y.iter().zip(x).filter(|(&yi, _)| yi == class).map(|(_, r)| r).collect()
}

fn mean_of(rows: &[&Vec<f64>], d: usize) -> Vec<f64> {
    let n = rows.len() as f64;
    (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect()
}

fn scatter(rows: &[&Vec<f64>], mean: &[f64], out: &mut Mat<f64>) {
    for r in rows {
        for i in 0..mean.len() {
            for j in 0..mean.len() {
                out[(i, j)] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
}

/// Maximum likelihood plug-in estimators for the three discriminant rules.
pub fn fit_discriminant(kind: DaKind, y: &[u8], x: &[Vec<f64>]) -> Result<DiscriminantParams> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch(y.len(), x.len()));
    }
    let d = x.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::InvalidInput("discriminant analysis needs at least one covariate".into()));
    }
    let g0 = class_rows(y, x, 0);
    let g1 = class_rows(y, x, 1);
    for (c, g) in [(0u8, &g0), (1u8, &g1)] {
        if g.len() < 2 {
            return Err(Error::DegenerateResponse(y.len(), 1 - c));
        }
    }
    let n = y.len() as f64;
    let mu0 = mean_of(&g0, d);
    let mu1 = mean_of(&g1, d);
    let pi1 = g1.len() as f64 / n;
    let mut s0 = Mat::<f64>::zeros(d, d);
    let mut s1 = Mat::<f64>::zeros(d, d);
    scatter(&g0, &mu0, &mut s0);
    scatter(&g1, &mu1, &mut s1);
    let params = match kind {
        DaKind::Lda | DaKind::Dlda => {
            let lambda = Mat::from_fn(d, d, |i, j| {
                if kind == DaKind::Dlda && i != j {
                    0.0
                } else {
                    (s0[(i, j)] + s1[(i, j)]) / (n - 2.0)
                }
            });
            DiscriminantParams {
                kind,
                pi0: 1.0 - pi1,
                pi1,
                mu0,
                mu1,
                lambda0: mat_to_rows(lambda.as_ref()),
                lambda1: mat_to_rows(lambda.as_ref()),
            }
        }
        DaKind::Qda => {
            let l0 = Mat::from_fn(d, d, |i, j| s0[(i, j)] / (g0.len() as f64 - 1.0));
            let l1 = Mat::from_fn(d, d, |i, j| s1[(i, j)] / (g1.len() as f64 - 1.0));
            DiscriminantParams {
                kind,
                pi0: 1.0 - pi1,
                pi1,
                mu0,
                mu1,
                lambda0: mat_to_rows(l0.as_ref()),
                lambda1: mat_to_rows(l1.as_ref()),
            }
        }
    };
    params.coefficients()?;
    Ok(params)
}

pub fn decision_da(params: &DiscriminantParams, x0: &[f64]) -> Result<DecisionScore> {
    let ld = params.coefficients()?.log_delta(x0)?;
    Ok(DecisionScore::from_log_odds(ld, params.kind.classifier()))
}
