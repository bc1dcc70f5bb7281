//! Decision scores and the non-spatial classifier family.

mod discriminant;
mod glm;
mod knn;
mod posterior;
mod saved;
mod score;
mod standardize;
mod svm;

pub use discriminant::{decision_da, fit_discriminant, DaKind, DiscriminantCoefficients, DiscriminantParams};
pub use glm::{decision_glm, fit_glm_mle, GlmFit, Link};
pub use knn::{knn_c, knn_g, knn_score, nearest};
pub use posterior::{
    posterior_mean_classifier, posterior_mean_probit, posterior_predictive_classifier,
    posterior_predictive_from_labels, posterior_predictive_from_latent,
};
pub use saved::{FittedClassifier, KnnModel, SavedClassifier, SCHEMA_VERSION};
pub use score::{classify, ClassifierKind, DecisionScore, TieBreak};
pub use standardize::Scaler;
pub use svm::{svm_decision, svm_fit, Kernel, SvmConfig, SvmModel};
