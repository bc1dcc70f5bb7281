use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use crate::error::Result;
use crate::linalg::{dot, SpdFactor};
use crate::spatial::CarSpectrum;

/// Latent dependence family shared by all Gibbs variants.
#[derive(Debug, Clone)]
pub enum LatentCovariance {
    /// `Sigma* = I`.
    Identity,
    /// `Sigma* = (1 - kappa) I + kappa K_sym(rho)`.
    Car(Arc<CarSpectrum>),
}

/// Latent covariance restricted to a training set and a prediction set.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    pub kind: LatentCovariance,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Factorisation and derived quantities of the training covariance at one `(rho, kappa)`.
#[derive(Debug)]
pub struct ThetaState {
    pub rho: f64,
    pub kappa: f64,
    k_train: Option<Arc<Mat<f64>>>,
    factor: Option<SpdFactor>,
    log_det: f64,
    precision: Option<Mat<f64>>,
    predict: Option<PredictTerms>,
}

/// Kriging weights `A = Sigma_{test,train} Q` and conditional variances for the prediction set.
#[derive(Debug)]
struct PredictTerms {
    weights: Mat<f64>,
    var: Vec<f64>,
}

impl ThetaState {
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn is_identity(&self) -> bool {
        self.factor.is_none()
    }

    /// `Sigma*^{-1}` on the training set; `None` means the identity.
    pub fn precision(&self) -> Option<&Mat<f64>> {
        self.precision.as_ref()
    }

    pub fn factor(&self) -> Option<&SpdFactor> {
        self.factor.as_ref()
    }

    /// `-0.5 log|Sigma*| - 0.5 r' Sigma*^{-1} r`.
    pub fn log_density_kernel(&self, r: &[f64]) -> f64 {
        match &self.factor {
            None => -0.5 * dot(r, r),
            Some(f) => -0.5 * self.log_det - 0.5 * f.quad_form(r),
        }
    }

    /// `Q r`.
    pub fn precision_times(&self, r: &[f64]) -> Vec<f64> {
        match &self.precision {
            None => r.to_vec(),
            Some(q) => crate::linalg::mat_vec(q.as_ref(), r),
        }
    }

    /// Conditional mean shift and variance of prediction site `j` (position in the test set) given
    /// training residuals `r`.
    pub fn predict_moments(&self, j: usize, r: &[f64]) -> (f64, f64) {
        match &self.predict {
            None => (0.0, 1.0),
            Some(p) => {
                let w = p.weights.as_ref();
                let shift: f64 = (0..r.len()).map(|i| w[(j, i)] * r[i]).sum();
                (shift, p.var[j])
            }
        }
    }
}

impl CovarianceModel {
    pub fn new(kind: LatentCovariance, train: Vec<usize>, test: Vec<usize>) -> Self {
        Self { kind, train, test }
    }

    pub fn n_train(&self) -> usize {
        self.train.len()
    }

    /// Factorises the training covariance at `(rho, kappa)`.
    pub fn state(&self, rho: f64, kappa: f64) -> Result<ThetaState> {
        match &self.kind {
            LatentCovariance::Identity => Ok(ThetaState {
                rho,
                kappa,
                k_train: None,
                factor: None,
                log_det: 0.0,
                precision: None,
                predict: None,
            }),
            LatentCovariance::Car(spec) => {
                let k = Arc::new(spec.dependence_block(rho, &self.train, &self.train)?);
                self.state_from_k(rho, kappa, k)
            }
        }
    }

    /// As [`Self::state`], reusing the dependence block of `base` (same `rho`).
    pub fn state_with_kappa(&self, base: &ThetaState, kappa: f64) -> Result<ThetaState> {
        match &base.k_train {
            None => self.state(base.rho, kappa),
            Some(k) => self.state_from_k(base.rho, kappa, Arc::clone(k)),
        }
    }

    fn state_from_k(&self, rho: f64, kappa: f64, k: Arc<Mat<f64>>) -> Result<ThetaState> {
        let sigma = blend(k.as_ref().as_ref(), kappa);
        let factor = SpdFactor::new(sigma.as_ref(), "latent covariance")?;
        let log_det = factor.log_det();
        Ok(ThetaState {
            rho,
            kappa,
            k_train: Some(k),
            factor: Some(factor),
            log_det,
            precision: None,
            predict: None,
        })
    }

    /// Computes the training precision and prediction terms.
    pub fn finalize(&self, state: &mut ThetaState) -> Result<()> {
        let (LatentCovariance::Car(spec), Some(factor)) = (&self.kind, &state.factor) else {
            return Ok(());
        };
        if state.precision.is_none() {
            state.precision = Some(factor.inverse());
        }
        if state.predict.is_none() && !self.test.is_empty() {
            let q = state.precision.as_ref().expect("set above");
            let kappa = state.kappa;
            let cross = spec.dependence_block(state.rho, &self.test, &self.train)?;
            let diag = spec.dependence_block_diag(state.rho, &self.test)?;
            let mut weights = Mat::<f64>::zeros(self.test.len(), self.train.len());
            matmul(weights.as_mut(), Accum::Replace, cross.as_ref(), q.as_ref(), kappa, Par::Seq);
            let var = (0..self.test.len())
                .map(|j| {
                    let explained: f64 = (0..self.train.len()).map(|i| weights[(j, i)] * cross[(j, i)]).sum();
                    ((1.0 - kappa) + kappa * diag[j] - kappa * explained).max(0.0)
                })
                .collect();
            state.predict = Some(PredictTerms { weights, var });
        }
        Ok(())
    }

    /// Covariance of an arbitrary site with the training set, and its variance.
    pub fn site_covariance(&self, state: &ThetaState, site: usize) -> Result<(Vec<f64>, f64)> {
        let in_train = |i: usize| self.train[i] == site;
        match &self.kind {
            LatentCovariance::Identity => {
                let cross = (0..self.train.len()).map(|i| if in_train(i) { 1.0 } else { 0.0 }).collect();
                Ok((cross, 1.0))
            }
            LatentCovariance::Car(spec) => {
                let kappa = state.kappa;
                let row = spec.dependence_block(state.rho, &[site], &self.train)?;
                let kjj = spec.dependence_block_diag(state.rho, &[site])?[0];
                let cross = (0..self.train.len())
                    .map(|i| kappa * row[(0, i)] + if in_train(i) { 1.0 - kappa } else { 0.0 })
                    .collect();
                Ok((cross, (1.0 - kappa) + kappa * kjj))
            }
        }
    }
}

/// `(1 - kappa) I + kappa K`.
pub fn blend(k: MatRef<'_, f64>, kappa: f64) -> Mat<f64> {
    let n = k.nrows();
    Mat::from_fn(n, n, |i, j| {
        let v = kappa * k[(i, j)];
        if i == j {
            v + (1.0 - kappa)
        } else {
            v
        }
    })
}

/// Memoised, finalised states keyed by the exact `(rho, kappa)` bits.
///
/// Metropolis rejections repeat parameter values, so post-processing a chain
/// factorises each distinct value once. The cache is emptied whenever it would
/// exceed [`ThetaMemo::BUDGET_BYTES`].
#[derive(Debug)]
pub struct ThetaMemo<'a> {
    model: &'a CovarianceModel,
    capacity: usize,
    cache: Mutex<HashMap<(u64, u64), Arc<ThetaState>>>,
}

impl<'a> ThetaMemo<'a> {
    pub const BUDGET_BYTES: usize = 256 << 20;

    pub fn new(model: &'a CovarianceModel) -> Self {
        let (m, t) = (model.train.len(), model.test.len());
        let per_state = 8 * (3 * m * m + 2 * t * m).max(1);
        Self {
            model,
            capacity: (Self::BUDGET_BYTES / per_state).max(1),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, rho: f64, kappa: f64) -> Result<Arc<ThetaState>> {
        let key = (rho.to_bits(), kappa.to_bits());
        if let Some(s) = self.cache.lock().expect("memo lock").get(&key) {
            return Ok(Arc::clone(s));
        }
        let mut state = self.model.state(rho, kappa)?;
        self.model.finalize(&mut state)?;
        let state = Arc::new(state);
        let mut cache = self.cache.lock().expect("memo lock");
        if cache.len() >= self.capacity {
            cache.clear();
        }
        cache.insert(key, Arc::clone(&state));
        Ok(state)
    }
}
