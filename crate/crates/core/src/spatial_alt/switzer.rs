use serde::{Deserialize, Serialize};

use super::window::CovariateField;
use crate::classify::{decision_da, fit_discriminant, DaKind, DecisionScore, DiscriminantParams};
use crate::error::{Error, Result};
use crate::model::Dataset;

/// LDA on `(x0, neighbour mean)` plus a plain LDA for isolated sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitzerModel {
    pub augmented: DiscriminantParams,
    pub plain: DiscriminantParams,
}

/// Decision plus whether the site had no neighbours and used plain LDA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitzerDecision {
    pub score: DecisionScore,
    pub isolated: bool,
}

/// Mean covariates over the second-order neighbours of `site`.
pub fn neighbor_mean(field: &CovariateField, site: usize) -> Option<Vec<f64>> {
    let nb = field.neighbors(site);
    if nb.is_empty() {
        return None;
    }
    let mut m = vec![0.0; field.dim()];
    for &j in &nb {
        for (a, v) in m.iter_mut().zip(&field.rows[j]) {
            *a += v;
        }
    }
    m.iter_mut().for_each(|v| *v /= nb.len() as f64);
    Some(m)
}

pub fn augment(x0: &[f64], xc: &[f64]) -> Vec<f64> {
    x0.iter().chain(xc).copied().collect()
}

pub fn switzer_fit(data: &Dataset) -> Result<SwitzerModel> {
    let field = CovariateField::from_dataset(data)?;
    let train = data.train_indices();
    let y = data.responses(&train)?;
    let plain_x: Vec<Vec<f64>> = train.iter().map(|&i| field.rows[i].clone()).collect();
    let plain = fit_discriminant(DaKind::Lda, &y, &plain_x)?;
    let (mut ya, mut xa) = (Vec::new(), Vec::new());
    for (k, &i) in train.iter().enumerate() {
        if let Some(xc) = neighbor_mean(&field, i) {
            ya.push(y[k]);
            xa.push(augment(&field.rows[i], &xc));
        }
    }
    if xa.is_empty() {
        return Err(Error::InvalidInput("no training site has a neighbour".into()));
    }
    let augmented = fit_discriminant(DaKind::Lda, &ya, &xa)?;
    Ok(SwitzerModel { augmented, plain })
}

/// LDA decision in the augmented space.
pub fn switzer_decision(x0: &[f64], neighbor_covariates: &[Vec<f64>], params: &DiscriminantParams) -> Result<DecisionScore> {
    if neighbor_covariates.is_empty() {
        return Err(Error::InvalidInput("focal site has no neighbours".into()));
    }
    let mut xc = vec![0.0; x0.len()];
    for r in neighbor_covariates {
        if r.len() != x0.len() {
            return Err(Error::LengthMismatch(r.len(), x0.len()));
        }
        xc.iter_mut().zip(r).for_each(|(a, v)| *a += v);
    }
    xc.iter_mut().for_each(|v| *v /= neighbor_covariates.len() as f64);
    switzer_score(decision_da(params, &augment(x0, &xc))?)
}

fn switzer_score(s: DecisionScore) -> Result<DecisionScore> {
    Ok(DecisionScore {
        source: crate::classify::ClassifierKind::Switzer,
        ..s
    })
}

/// Decision at a site of the dataset the model was fitted on.
pub fn switzer_classify(model: &SwitzerModel, field: &CovariateField, site: usize) -> Result<SwitzerDecision> {
    match neighbor_mean(field, site) {
        Some(xc) => Ok(SwitzerDecision {
            score: switzer_score(decision_da(&model.augmented, &augment(&field.rows[site], &xc))?)?,
            isolated: false,
        }),
        None => {
            log::warn!("site {site} has no neighbours; using plain LDA");
            Ok(SwitzerDecision {
                score: switzer_score(decision_da(&model.plain, &field.rows[site])?)?,
                isolated: true,
            })
        }
    }
}
