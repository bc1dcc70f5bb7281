use serde::{Deserialize, Serialize};

use super::score::{ClassifierKind, DecisionScore};
use super::standardize::Scaler;
use crate::error::{Error, Result};
use crate::linalg::dot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    /// `(1 + x'y)^degree`.
    Poly { degree: u32 },
    /// `exp(-u |x - y|^2)`.
    Radial { u: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Poly { degree } => (1.0 + dot(a, b)).powi(degree as i32),
            Kernel::Radial { u } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-u * d2).exp()
            }
        }
    }

    fn classifier(&self) -> ClassifierKind {
        match self {
            Kernel::Linear => ClassifierKind::SvmLinear,
            Kernel::Poly { .. } => ClassifierKind::SvmCubic,
            Kernel::Radial { .. } => ClassifierKind::SvmRadial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub kernel: Kernel,
    /// Box constraint on the multipliers.
    pub lambda: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Scale covariates by training means and standard deviations.
    pub standardize: bool,
}

impl SvmConfig {
    pub fn new(kernel: Kernel, lambda: f64) -> Self {
        Self {
            kernel,
            lambda,
            tolerance: 1e-5,
            max_iter: 10_000_000,
            standardize: true,
        }
    }
}

/// Trained soft-margin classifier; only support vectors are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub lambda: f64,
    /// Multipliers of the full training set.
    pub zeta: Vec<f64>,
    pub beta0: f64,
    pub support_indices: Vec<usize>,
    pub support_vectors: Vec<Vec<f64>>,
    /// `+1` or `-1` per support vector.
    pub support_labels: Vec<f64>,
    pub scaler: Option<Scaler>,
    pub iterations: usize,
}

/// Index selection and update follow the second-order working-set rule of
/// Fan, Chen and Lin for the box-constrained dual.
pub fn svm_fit(y: &[u8], x: &[Vec<f64>], cfg: &SvmConfig) -> Result<SvmModel> {
    let n = y.len();
    if x.len() != n {
        return Err(Error::LengthMismatch(x.len(), n));
    }
    if !(cfg.lambda > 0.0 && cfg.lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("box constraint must be positive, got {}", cfg.lambda)));
    }
    if let Kernel::Radial { u } = cfg.kernel {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::InvalidInput(format!("radial kernel scale must be nonnegative, got {u}")));
        }
    }
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == n {
        return Err(Error::DegenerateResponse(n, u8::from(ones == n)));
    }
    let scaler = cfg.standardize.then(|| Scaler::fit(x));
    let xs: Vec<Vec<f64>> = match &scaler {
        Some(s) => s.transform_all(x),
        None => x.to_vec(),
    };
    let ys: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = cfg.kernel.eval(&xs[i], &xs[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let c = cfg.lambda;
    let (zeta, iterations) = smo(&k, &ys, c, cfg.tolerance, cfg.max_iter)?;

    let f_no_bias = |i: usize| -> f64 { (0..n).map(|j| zeta[j] * ys[j] * k[i * n + j]).sum() };
    let bound_eps = 1e-8 * c;
    let free: Vec<usize> = (0..n).filter(|&i| zeta[i] > bound_eps && zeta[i] < c - bound_eps).collect();
    let beta0 = if free.is_empty() {
        // Feasible interval for the intercept from the bounded multipliers.
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let r = ys[i] - f_no_bias(i);
            let at_upper = zeta[i] >= c - bound_eps;
            if (ys[i] > 0.0) != at_upper {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    } else {
        free.iter().map(|&i| ys[i] - f_no_bias(i)).sum::<f64>() / free.len() as f64
    };
    let support_indices: Vec<usize> = (0..n).filter(|&i| zeta[i] > 0.0).collect();
    Ok(SvmModel {
        kernel: cfg.kernel,
        lambda: c,
        support_vectors: support_indices.iter().map(|&i| xs[i].clone()).collect(),
        support_labels: support_indices.iter().map(|&i| ys[i]).collect(),
        support_indices,
        zeta,
        beta0,
        scaler,
        iterations,
    })
}

fn smo(k: &[f64], ys: &[f64], c: f64, eps: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let n = ys.len();
    let tau = 1e-12;
    let mut alpha = vec![0.0; n];
    // Gradient of 0.5 a'Qa - e'a with Q_ij = y_i y_j K_ij.
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);
    for iter in 0..max_iter {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(alpha[t], ys[t]) {
                let v = -ys[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..n {
                if !in_low(alpha[t], ys[t]) {
                    continue;
                }
                let v = -ys[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t];
                    if a <= 0.0 {
                        a = tau;
                    }
                    let obj = -(b * b) / a;
                    if obj < best {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < eps {
            return Ok((alpha, iter));
        }

        let (yi, yj) = (ys[i], ys[j]);
        let mut quad = k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j];
        if quad <= 0.0 {
            quad = tau;
        }
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if yi != yj {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = old_i - old_j;
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = old_i + old_j;
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += ys[t] * (yi * k[t * n + i] * di + yj * k[t * n + j] * dj);
        }
    }
    Err(Error::NonConvergence {
        what: "SVM dual solver",
        iterations: max_iter,
    })
}

impl SvmModel {
    /// `f(x) = sum zeta_i y_i h(x, x_i) + beta0` on the raw covariate scale.
    pub fn decision_value(&self, x0: &[f64]) -> f64 {
        let x = match &self.scaler {
            Some(s) => s.transform(x0),
            None => x0.to_vec(),
        };
        let zs = self.support_indices.iter().map(|&i| self.zeta[i]);
        zs.zip(&self.support_vectors)
            .zip(&self.support_labels)
            .map(|((z, sv), y)| z * y * self.kernel.eval(&x, sv))
            .sum::<f64>()
            + self.beta0
    }
}

/// `delta = exp(f)`: only the sign of `f` carries meaning, and `p1` is undefined.
pub fn svm_decision(model: &SvmModel, x0: &[f64]) -> DecisionScore {
    DecisionScore::from_delta(model.decision_value(x0).exp(), model.kernel.classifier())
}
