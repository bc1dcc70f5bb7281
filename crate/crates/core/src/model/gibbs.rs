use std::sync::Arc;
use std::time::Instant;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::covariance::{CovarianceModel, LatentCovariance, ThetaState};
use super::data::Dataset;
use super::prior::PriorSpec;
use super::samples::{GewekeEntry, ModelKind, PosteriorSamples, SampleMeta};
use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec, select_rows, SpdFactor};
use crate::sampler::{
    chisq_sample, geweke_default, rw_metropolis_step, scaled_inv_chisq_sample, truncated_normal_sample,
    MetropolisState, ProposalTuner, RngStream,
};
use crate::spatial::{CarSpectrum, NeighborOrder};

/// Chain length, burn-in, thinning and proposal settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub rng: RngStream,
    pub rho_proposal_sd: f64,
    pub kappa_proposal_sd: f64,
    /// Tune proposal scales during burn-in; they are frozen afterwards.
    pub adapt: bool,
    pub init_rho: f64,
    pub init_kappa: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iters: 20_000,
            burn_in: 10_000,
            thin: 1,
            rng: RngStream::new(0, 0),
            rho_proposal_sd: 0.05,
            kappa_proposal_sd: 0.1,
            adapt: true,
            init_rho: 0.5,
            init_kappa: 0.5,
        }
    }
}

impl McmcConfig {
    pub fn new(iters: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            iters,
            burn_in,
            rng: RngStream::new(seed, 0),
            ..Self::default()
        }
    }

    pub fn with_stream(mut self, rng: RngStream) -> Self {
        self.rng = rng;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iters == 0 || self.burn_in >= self.iters {
            return Err(Error::InvalidInput(format!(
                "need iters > burn_in, got iters {} burn_in {}",
                self.iters, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidInput("thin must be at least 1".into()));
        }
        if !(self.rho_proposal_sd > 0.0 && self.kappa_proposal_sd > 0.0) {
            return Err(Error::InvalidInput("proposal standard deviations must be positive".into()));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        (self.iters - self.burn_in).div_ceil(self.thin)
    }
}

/// How the SGLMM treats the spatial variance fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaMode {
    /// Metropolis updates under a uniform prior on (0, 1).
    Sampled,
    Fixed(f64),
}

/// Everything needed to post-process a chain: design, covariance family and partition.
#[derive(Debug, Clone)]
pub struct FitArtifacts {
    pub covariance: CovarianceModel,
    /// Design over all locations (for the low-rank fit this is `[X Psi]`).
    pub design: Mat<f64>,
    pub y_train: Vec<u8>,
}

impl FitArtifacts {
    pub fn train(&self) -> &[usize] {
        &self.covariance.train
    }

    pub fn test(&self) -> &[usize] {
        &self.covariance.test
    }

    pub fn design_row(&self, i: usize) -> Vec<f64> {
        (0..self.design.ncols()).map(|j| self.design[(i, j)]).collect()
    }

    pub fn train_design(&self) -> Mat<f64> {
        select_rows(self.design.as_ref(), self.train())
    }
}

/// A fitted latent-variable model: retained draws plus the artifacts that produced them.
#[derive(Debug, Clone)]
pub struct Fit {
    pub samples: PosteriorSamples,
    pub artifacts: FitArtifacts,
}

impl Fit {
    /// `(rho, kappa)` at retained iteration `t`, with the model's fixed values filled in.
    pub fn theta_at(&self, t: usize) -> (f64, f64) {
        let s = &self.samples;
        let rho = s.rho_at(t).unwrap_or(0.0);
        let kappa = s.kappa_at(t).unwrap_or(match s.meta.model {
            ModelKind::Sglm => 1.0,
            _ => 0.0,
        });
        (rho, kappa)
    }
}

pub(crate) struct GibbsSpec {
    pub model: ModelKind,
    pub design: Mat<f64>,
    pub column_names: Vec<String>,
    pub covariance: CovarianceModel,
    pub y_train: Vec<u8>,
    pub beta_prior_cov: Mat<f64>,
    pub gamma_df: f64,
    pub gamma_scale: f64,
    pub rho_bounds: (f64, f64),
    pub kappa: KappaMode,
    pub record_kappa: bool,
    pub lowrank_rank: Option<usize>,
}

/// Step-two quantities that depend only on the current covariance.
struct ConjugateTerms {
    xtq: Mat<f64>,
    post: SpdFactor,
}

fn conjugate_terms(x_tr: &Mat<f64>, state: &ThetaState, v_inv: &Mat<f64>) -> Result<ConjugateTerms> {
    let p = x_tr.ncols();
    let n = x_tr.nrows();
    let xtq = match state.precision() {
        None => x_tr.transpose().to_owned(),
        Some(q) => {
            let mut out = Mat::<f64>::zeros(p, n);
            matmul(out.as_mut(), Accum::Replace, x_tr.transpose(), q.as_ref(), 1.0, Par::Seq);
            out
        }
    };
    let mut prec = v_inv.clone();
    matmul(prec.as_mut(), Accum::Add, xtq.as_ref(), x_tr.as_ref(), 1.0, Par::Seq);
    crate::linalg::symmetrize_in_place(&mut prec);
    let post = SpdFactor::new(prec.as_ref(), "posterior precision of beta")?;
    Ok(ConjugateTerms { xtq, post })
}

fn residual(z: &[f64], x: &Mat<f64>, beta: &[f64]) -> Vec<f64> {
    let xb = mat_vec(x.as_ref(), beta);
    z.iter().zip(xb).map(|(a, b)| a - b).collect()
}

pub(crate) fn run_gibbs(spec: GibbsSpec, cfg: &McmcConfig) -> Result<Fit> {
    cfg.validate()?;
    let started = Instant::now();
    let GibbsSpec {
        model,
        design,
        column_names,
        covariance,
        y_train,
        beta_prior_cov,
        gamma_df,
        gamma_scale,
        rho_bounds,
        kappa,
        record_kappa,
        lowrank_rank,
    } = spec;
    let spatial = matches!(covariance.kind, LatentCovariance::Car(_));
    let n_tr = covariance.train.len();
    let p = design.ncols();
    if p >= n_tr {
        return Err(Error::InvalidInput(format!(
            "need fewer coefficients ({p}) than training locations ({n_tr})"
        )));
    }
    let x_tr = select_rows(design.as_ref(), &covariance.train);
    let x_te = select_rows(design.as_ref(), &covariance.test);
    let v_inv = SpdFactor::new(beta_prior_cov.as_ref(), "beta prior covariance")?.inverse();
    let mut rng = cfg.rng.rng();

    let (rho_lo, rho_hi) = rho_bounds;
    let rho0 = if !spatial {
        0.0
    } else if cfg.init_rho > rho_lo && cfg.init_rho < rho_hi {
        cfg.init_rho
    } else {
        0.5 * (rho_lo + rho_hi)
    };
    let kappa0 = match kappa {
        KappaMode::Fixed(v) => {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!("fixed kappa {v} outside [0, 1]")));
            }
            v
        }
        KappaMode::Sampled => cfg.init_kappa.clamp(0.01, 0.99),
    };
    let sample_kappa = spatial && kappa == KappaMode::Sampled;

    let mut state = covariance.state(rho0, kappa0)?;
    covariance.finalize(&mut state)?;
    let mut terms = conjugate_terms(&x_tr, &state, &v_inv)?;

    let mut beta = vec![0.0; p];
    let mut z: Vec<f64> = y_train.iter().map(|&y| if y == 1 { 0.8 } else { -0.8 }).collect();
    let mut rho_mh = MetropolisState::new(rho0, cfg.rho_proposal_sd);
    let mut kappa_mh = MetropolisState::new(kappa0, cfg.kappa_proposal_sd);
    let mut rho_tuner = ProposalTuner::default();
    let mut kappa_tuner = ProposalTuner::default();

    let retained = cfg.retained();
    let mut out_beta = Vec::with_capacity(retained);
    let mut out_rho = Vec::with_capacity(if spatial { retained } else { 0 });
    let mut out_kappa = Vec::with_capacity(retained);
    let mut out_gamma2 = Vec::with_capacity(retained);
    let mut out_ztest = Vec::with_capacity(retained);
    let mut out_ztrain = Vec::with_capacity(retained);

    let bounds = |y: u8| if y == 1 { (0.0, f64::INFINITY) } else { (f64::NEG_INFINITY, 0.0) };

    for t in 0..cfg.iters {
        if t == cfg.burn_in {
            rho_mh.accepts = 0;
            rho_mh.attempts = 0;
            kappa_mh.accepts = 0;
            kappa_mh.attempts = 0;
        }

        // Step 1: working variance from its prior, then a sweep over the training latents.
        let gamma_temp = scaled_inv_chisq_sample(gamma_df, gamma_scale, &mut rng)?.sqrt();
        let xb = mat_vec(x_tr.as_ref(), &beta);
        let mut r: Vec<f64> = z.iter().zip(&xb).map(|(a, b)| a - b).collect();
        match state.precision() {
            None => {
                for i in 0..n_tr {
                    let (lo, hi) = bounds(y_train[i]);
                    let zt = truncated_normal_sample(gamma_temp * xb[i], gamma_temp * gamma_temp, lo, hi, &mut rng)?;
                    z[i] = zt / gamma_temp;
                }
            }
            Some(q) => {
                let mut s = mat_vec(q.as_ref(), &r);
                for i in 0..n_tr {
                    let qii = q[(i, i)];
                    let mean = xb[i] + r[i] - s[i] / qii;
                    let var = 1.0 / qii;
                    let (lo, hi) = bounds(y_train[i]);
                    let zt = truncated_normal_sample(gamma_temp * mean, gamma_temp * gamma_temp * var, lo, hi, &mut rng)?;
                    let znew = zt / gamma_temp;
                    let delta = znew - z[i];
                    if delta != 0.0 {
                        z[i] = znew;
                        r[i] += delta;
                        for (sk, qk) in s.iter_mut().zip(q.col_as_slice(i)) {
                            *sk += delta * qk;
                        }
                    }
                }
            }
        }

        // Step 2: joint draw of (gamma^2, beta~) given Z~ = gamma_temp Z, then rescale.
        let z_tilde: Vec<f64> = z.iter().map(|v| gamma_temp * v).collect();
        let rhs = mat_vec(terms.xtq.as_ref(), &z_tilde);
        let beta_hat = terms.post.solve_vec(&rhs);
        let e = residual(&z_tilde, &x_tr, &beta_hat);
        let qe = state.precision_times(&e);
        let prior_quad = dot(&beta_hat, &mat_vec(v_inv.as_ref(), &beta_hat));
        let ss = dot(&e, &qe) + prior_quad + gamma_scale;
        let gamma2 = ss / chisq_sample(n_tr as f64 + gamma_df, &mut rng)?;
        let gamma = gamma2.sqrt();
        let u: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
        let dev = terms.post.unwhiten_precision(&u);
        for k in 0..p {
            beta[k] = (beta_hat[k] + gamma * dev[k]) / gamma;
        }
        for (zi, zt) in z.iter_mut().zip(&z_tilde) {
            *zi = zt / gamma;
        }

        // Steps 3 and 4: random-walk Metropolis on rho and kappa.
        let mut changed = false;
        if spatial {
            let r = residual(&z, &x_tr, &beta);
            let mut current_lp = state.log_density_kernel(&r);
            let mut candidate: Option<ThetaState> = None;
            let (accepted, lp) = rw_metropolis_step(
                &mut rho_mh,
                current_lp,
                |prop| match covariance.state(prop, state.kappa) {
                    Ok(s) => {
                        let lp = s.log_density_kernel(&r);
                        candidate = Some(s);
                        lp
                    }
                    Err(_) => f64::NEG_INFINITY,
                },
                rho_lo,
                rho_hi,
                &mut rng,
            );
            if accepted {
                state = candidate.take().expect("accepted proposal has a state");
                current_lp = lp;
                changed = true;
            }
            if t < cfg.burn_in && cfg.adapt {
                rho_tuner.record(&mut rho_mh, accepted);
            }

            if sample_kappa {
                let mut candidate: Option<ThetaState> = None;
                let (accepted, _) = rw_metropolis_step(
                    &mut kappa_mh,
                    current_lp,
                    |prop| match covariance.state_with_kappa(&state, prop) {
                        Ok(s) => {
                            let lp = s.log_density_kernel(&r);
                            candidate = Some(s);
                            lp
                        }
                        Err(_) => f64::NEG_INFINITY,
                    },
                    0.0,
                    1.0,
                    &mut rng,
                );
                if accepted {
                    state = candidate.take().expect("accepted proposal has a state");
                    changed = true;
                }
                if t < cfg.burn_in && cfg.adapt {
                    kappa_tuner.record(&mut kappa_mh, accepted);
                }
            }
        }
        if changed {
            covariance.finalize(&mut state)?;
            terms = conjugate_terms(&x_tr, &state, &v_inv)?;
        }

        if t >= cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0 {
            let r = residual(&z, &x_tr, &beta);
            let xb_te = mat_vec(x_te.as_ref(), &beta);
            let z_test: Vec<f64> = (0..covariance.test.len())
                .map(|j| {
                    let (shift, var) = state.predict_moments(j, &r);
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    xb_te[j] + shift + var.sqrt() * eps
                })
                .collect();
            out_beta.push(beta.clone());
            if spatial {
                out_rho.push(state.rho);
            }
            out_kappa.push(state.kappa);
            out_gamma2.push(gamma2);
            out_ztest.push(z_test);
            out_ztrain.push(z.clone());
        }
        if log::log_enabled!(log::Level::Trace) && t % 1000 == 0 {
            log::trace!("{} iteration {t}: rho {:.4} kappa {:.4}", model.tag(), state.rho, state.kappa);
        }
    }

    let rho_chain = spatial.then_some(out_rho);
    let kappa_chain = (spatial && record_kappa).then_some(out_kappa);
    let mut geweke = Vec::new();
    for k in 0..p {
        let chain: Vec<f64> = out_beta.iter().map(|b| b[k]).collect();
        geweke.push(GewekeEntry {
            parameter: format!("beta[{}]", column_names.get(k).map_or("?", String::as_str)),
            z: geweke_default(&chain).ok(),
        });
    }
    if let Some(chain) = &rho_chain {
        geweke.push(GewekeEntry {
            parameter: "rho".into(),
            z: geweke_default(chain).ok(),
        });
    }
    if sample_kappa {
        if let Some(chain) = &kappa_chain {
            geweke.push(GewekeEntry {
                parameter: "kappa".into(),
                z: geweke_default(chain).ok(),
            });
        }
    }
    let geweke_flagged = geweke.iter().any(|g| g.z.is_some_and(|z| z.abs() > 4.0));
    if geweke_flagged {
        log::warn!("{} chain has a Geweke |z| above 4", model.tag());
    }

    let meta = SampleMeta {
        model,
        iters: cfg.iters,
        burn_in: cfg.burn_in,
        thin: cfg.thin,
        rng: cfg.rng,
        kappa_fixed: match kappa {
            KappaMode::Fixed(v) if spatial => Some(v),
            _ => None,
        },
        column_names,
        train_indices: covariance.train.clone(),
        test_indices: covariance.test.clone(),
        rho_acceptance: spatial.then(|| rho_mh.acceptance_rate()),
        kappa_acceptance: sample_kappa.then(|| kappa_mh.acceptance_rate()),
        rho_proposal_sd: spatial.then_some(rho_mh.proposal_sd),
        kappa_proposal_sd: sample_kappa.then_some(kappa_mh.proposal_sd),
        lowrank_rank,
        geweke,
        geweke_flagged,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok(Fit {
        samples: PosteriorSamples {
            beta: out_beta,
            rho: rho_chain,
            kappa: kappa_chain,
            gamma2: out_gamma2,
            z_test: out_ztest,
            z_train: out_ztrain,
            meta,
        },
        artifacts: FitArtifacts {
            covariance,
            design,
            y_train,
        },
    })
}

/// Second-order lattice spectrum for a dataset's locations.
pub fn car_spectrum(data: &Dataset) -> Result<Arc<CarSpectrum>> {
    Ok(Arc::new(CarSpectrum::new(&data.neighbors(NeighborOrder::Second))?))
}

fn base_spec(
    data: &Dataset,
    priors: &PriorSpec,
    model: ModelKind,
    kind: LatentCovariance,
    kappa: KappaMode,
    record_kappa: bool,
) -> Result<GibbsSpec> {
    data.check_training_response()?;
    priors.validate(data.p())?;
    let train = data.train_indices();
    let y_train = data.responses(&train)?;
    Ok(GibbsSpec {
        model,
        design: data.x.clone(),
        column_names: data.column_names.clone(),
        covariance: CovarianceModel::new(kind, train, data.prediction_indices()),
        y_train,
        beta_prior_cov: priors.beta_cov_matrix(data.p())?,
        gamma_df: priors.gamma_df,
        gamma_scale: priors.gamma_scale,
        rho_bounds: priors.rho_bounds,
        kappa,
        record_kappa,
        lowrank_rank: None,
    })
}

/// Probit SGLM: CAR latent covariance with `kappa = 1`.
pub fn fit_sglm(data: &Dataset, priors: &PriorSpec, cfg: &McmcConfig) -> Result<Fit> {
    fit_sglm_with(data, priors, cfg, car_spectrum(data)?)
}

pub fn fit_sglm_with(data: &Dataset, priors: &PriorSpec, cfg: &McmcConfig, spectrum: Arc<CarSpectrum>) -> Result<Fit> {
    let spec = base_spec(
        data,
        priors,
        ModelKind::Sglm,
        LatentCovariance::Car(spectrum),
        KappaMode::Fixed(1.0),
        false,
    )?;
    run_gibbs(spec, cfg)
}

/// Probit SGLMM with the spatial fraction `kappa` sampled or held fixed.
pub fn fit_sglmm(data: &Dataset, priors: &PriorSpec, cfg: &McmcConfig, kappa: KappaMode) -> Result<Fit> {
    fit_sglmm_with(data, priors, cfg, kappa, car_spectrum(data)?)
}

pub fn fit_sglmm_with(
    data: &Dataset,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    kappa: KappaMode,
    spectrum: Arc<CarSpectrum>,
) -> Result<Fit> {
    let spec = base_spec(data, priors, ModelKind::Sglmm, LatentCovariance::Car(spectrum), kappa, true)?;
    run_gibbs(spec, cfg)
}

/// Independent probit regression via data augmentation.
pub fn fit_indep_probit(data: &Dataset, priors: &PriorSpec, cfg: &McmcConfig) -> Result<Fit> {
    let spec = base_spec(
        data,
        priors,
        ModelKind::IndependentProbit,
        LatentCovariance::Identity,
        KappaMode::Fixed(0.0),
        false,
    )?;
    run_gibbs(spec, cfg)
}

pub(crate) fn lowrank_spec(data: &Dataset, priors: &PriorSpec, design: Mat<f64>, names: Vec<String>, r: usize) -> Result<GibbsSpec> {
    let mut spec = base_spec(
        data,
        priors,
        ModelKind::LowRank,
        LatentCovariance::Identity,
        KappaMode::Fixed(0.0),
        false,
    )?;
    let p = data.p();
    let mut v = Mat::<f64>::zeros(p + r, p + r);
    let vb = priors.beta_cov_matrix(p)?;
    for i in 0..p {
        for j in 0..p {
            v[(i, j)] = vb[(i, j)];
        }
    }
    for k in p..p + r {
        v[(k, k)] = super::lowrank::PSI_PRIOR_VARIANCE;
    }
    spec.design = design;
    spec.column_names = names;
    spec.beta_prior_cov = v;
    spec.lowrank_rank = Some(r);
    Ok(spec)
}
