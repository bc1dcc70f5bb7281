//! Spatial classifiers built on covariate dependence: Switzer, Mardia, spatial LDA and Press.

mod gls;
mod mardia;
mod press;
mod slda;
mod switzer;
mod variogram;
mod window;

pub use mardia::{mardia_classify, mardia_decision, mardia_estimate, mardia_fit, mardia_score, MardiaClass, MardiaParams, MARDIA_WINDOW};
pub use press::{
    directional_neighborhood, kronecker_log_density, kronecker_log_density_dense, press_classify, press_fit,
    press_fit_class, press_log_delta, press_preclassify, PressChain, PressConfig, PressDraw, PressModel,
    PRESS_DIRECTIONS, PRESS_THETA_MAX,
};
pub use slda::{spatial_lda_decision, spatial_lda_estimate, spatial_lda_fit, spatial_lda_log_delta, SldaClass, SpatialLdaParams, UBasis};
pub use switzer::{augment, neighbor_mean, switzer_classify, switzer_decision, switzer_fit, SwitzerDecision, SwitzerModel};
pub use variogram::{
    empirical_variogram, fit_exponential, theta_or_default, variogram_fit, variogram_fit_multi, EmpiricalVariogram,
    VariogramFit, THETA_MAX, THETA_MIN,
};
pub use window::{CovariateField, Window};
