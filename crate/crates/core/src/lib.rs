//! Spatial binary classification with probit SGLM/SGLMM latent-variable samplers.
//!
//! The crate is organised bottom-up:
//!
//! * [`spatial`] builds lattice neighbourhoods, CAR dependence matrices, Gaussian
//!   conditioning and the Moran operator.
//! * [`sampler`] provides the stochastic kernels (truncated normal, scaled
//!   inverse-chi-square, multivariate normal, random-walk Metropolis) and the
//!   Geweke diagnostic.
//! * [`model`] fits the SGLM, SGLMM, independent probit and low-rank SGLMM by
//!   data-augmentation Gibbs sampling.
//! * [`classify`] holds decision functions: GLM, discriminant analysis, SVM, kNN
//!   and the Bayesian posterior classifiers.
//! * [`spatial_alt`] holds the Switzer, Mardia, spatial LDA and Press classifiers.
//! * [`eval`] simulates datasets, splits them and computes error rates.
//! * [`cli`] wires everything into file-based batch commands.

pub mod classify;
pub mod cli;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod model;
pub mod sampler;
pub mod spatial;
pub mod spatial_alt;

pub use error::{Error, Result};
