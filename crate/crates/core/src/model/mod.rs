//! Data-augmentation Gibbs samplers for the probit SGLM, SGLMM, independent probit and low-rank SGLMM.

mod covariance;
mod data;
mod gibbs;
mod lowrank;
mod predict;
mod prior;
mod samples;

pub use covariance::{blend, CovarianceModel, LatentCovariance, ThetaMemo, ThetaState};
pub use data::{Dataset, Standardization};
pub use gibbs::{
    car_spectrum, fit_indep_probit, fit_sglm, fit_sglm_with, fit_sglmm, fit_sglmm_with, Fit, FitArtifacts, KappaMode,
    McmcConfig,
};
pub use lowrank::{fit_lowrank, PSI_PRIOR_VARIANCE};
pub use predict::{latent_conditional_moments, predict_latent};
pub use prior::{BetaCov, PriorSpec};
pub use samples::{quantile_sorted, GewekeEntry, ModelKind, PosteriorSamples, SampleMeta};

#[cfg(test)]
mod tests;
