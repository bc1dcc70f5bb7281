use faer::Mat;

use super::data::Dataset;
use super::gibbs::{lowrank_spec, run_gibbs, Fit, McmcConfig};
use super::prior::PriorSpec;
use crate::error::{Error, Result};
use crate::linalg::SpdFactor;
use crate::spatial::{moran_operator_rank, rank_for_fraction, NeighborOrder};

/// Prior variance of the Moran-basis coefficients.
pub const PSI_PRIOR_VARIANCE: f64 = 100.0;

/// Low-rank SGLMM: probit regression on `[X Psi]` with `Psi` the leading Moran eigenvectors.
///
/// `r = ceil(r_frac * n)`; with `r = 0` this is exactly the independent probit fit.
pub fn fit_lowrank(data: &Dataset, priors: &PriorSpec, r_frac: f64, cfg: &McmcConfig) -> Result<Fit> {
    if !(0.0..=1.0).contains(&r_frac) {
        return Err(Error::InvalidInput(format!("r_frac must lie in [0, 1], got {r_frac}")));
    }
    let n = data.n();
    let p = data.p();
    let r = rank_for_fraction(n, r_frac).min(n.saturating_sub(p));
    let mut names = data.column_names.clone();
    let design = if r == 0 {
        data.x.clone()
    } else {
        let adjacency = data.neighbors(NeighborOrder::Second);
        let basis = moran_operator_rank(data.x.as_ref(), adjacency.adjacency().as_ref(), r)?;
        names.extend((1..=r).map(|k| format!("psi{k}")));
        let design = Mat::from_fn(n, p + r, |i, j| if j < p { data.x[(i, j)] } else { basis.vectors[(i, j - p)] });
        let gram = design.transpose() * &design;
        SpdFactor::new(gram.as_ref(), "[X Psi]'[X Psi]").map_err(|_| Error::RankDeficient("[X Psi] is rank deficient".into()))?;
        design
    };
    let spec = lowrank_spec(data, priors, design, names, r)?;
    run_gibbs(spec, cfg)
}
