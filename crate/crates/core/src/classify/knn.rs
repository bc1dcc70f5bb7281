use super::score::{ClassifierKind, DecisionScore};
use crate::error::{Error, Result};

/// Indices of the `k` training points nearest to `x0`.
///
/// Equidistant points are ranked by ascending training index.
pub fn nearest(x0: &[f64], train: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if k > train.len() {
        return Err(Error::InvalidInput(format!("k = {k} exceeds the {} training points", train.len())));
    }
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != x0.len() {
                return Err(Error::LengthMismatch(row.len(), x0.len()));
            }
            Ok((row.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        })
        .collect::<Result<_>>()?;
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(d.into_iter().take(k).map(|(_, i)| i).collect())
}

/// `delta = 2 * mean(y over the k nearest)`.
pub fn knn_score(x0: &[f64], train: &[Vec<f64>], y: &[u8], k: usize, source: ClassifierKind) -> Result<DecisionScore> {
    if train.len() != y.len() {
        return Err(Error::LengthMismatch(train.len(), y.len()));
    }
    let idx = nearest(x0, train, k)?;
    let ones = idx.iter().filter(|&&i| y[i] == 1).count();
    Ok(DecisionScore::from_delta(2.0 * ones as f64 / k as f64, source))
}

/// Neighbours in (standardised) covariate space.
pub fn knn_c(x0: &[f64], train: &[Vec<f64>], y: &[u8], k: usize) -> Result<DecisionScore> {
    knn_score(x0, train, y, k, ClassifierKind::KnnC)
}

/// Neighbours in geographic space.
pub fn knn_g(s0: [f64; 2], sites: &[[f64; 2]], y: &[u8], k: usize) -> Result<DecisionScore> {
    let train: Vec<Vec<f64>> = sites.iter().map(|s| s.to_vec()).collect();
    knn_score(&s0, &train, y, k, ClassifierKind::KnnG)
}
