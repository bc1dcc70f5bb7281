//! Stochastic kernels and convergence diagnostics.

mod draws;
mod geweke;
mod metropolis;
mod normal;
mod rng;
mod truncnorm;

pub use draws::{
    chisq_sample, inverse_wishart_sample, mvn_from_factor, mvn_sample, scaled_inv_chisq_sample, standard_normal_vec,
};
pub use geweke::{geweke_default, geweke_z, mean_and_spectral_variance};
pub use metropolis::{rw_metropolis_step, MetropolisState, ProposalTuner};
pub use normal::{norm_cdf, norm_ln_pdf, norm_pdf, norm_quantile, norm_sf};
pub use rng::RngStream;
pub use truncnorm::truncated_normal_sample;
