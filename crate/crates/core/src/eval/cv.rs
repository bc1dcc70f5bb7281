use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::RngStream;

/// Stratified fold id per observation.
pub fn stratified_folds<R: Rng + ?Sized>(y: &[u8], k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k < 2 || k > y.len() {
        return Err(Error::InvalidInput(format!("need 2 <= k <= {}, got k = {k}", y.len())));
    }
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(rng);
        for i in idx {
            fold[i] = next % k;
            next += 1;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, Serialize)]
pub struct CvResult<P> {
    pub best: P,
    pub cve: f64,
    /// Cross-validation error per grid point; `None` when no fold could be scored.
    pub grid: Vec<(P, Option<f64>)>,
}

/// K-fold tuning over `grid`.
///
/// `predict(params, train, validation, stream)` returns labels for the
/// validation indices. Folds whose training part holds one class only are
/// skipped. The minimiser with the smallest parameter wins ties.
pub fn kfold_cv_tune<P, F>(grid: &[P], y: &[u8], k: usize, stream: RngStream, predict: F) -> Result<CvResult<P>>
where
    P: Clone + PartialOrd + Send + Sync,
    F: Fn(&P, &[usize], &[usize], RngStream) -> Result<Vec<u8>> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidInput("tuning grid is empty".into()));
    }
    let folds = stratified_folds(y, k, &mut stream.rng())?;
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .map(|f| {
            let train = (0..y.len()).filter(|&i| folds[i] != f).collect();
            let val = (0..y.len()).filter(|&i| folds[i] == f).collect();
            (train, val)
        })
        .collect();
    let usable: Vec<bool> = splits
        .iter()
        .map(|(train, val)| {
            let ones = train.iter().filter(|&&i| y[i] == 1).count();
            !val.is_empty() && ones > 0 && ones < train.len()
        })
        .collect();
    for (f, ok) in usable.iter().enumerate() {
        if !ok {
            log::warn!("cross-validation fold {f} has a single-class training set and is skipped");
        }
    }
    let scores: Vec<Option<f64>> = grid
        .par_iter()
        .enumerate()
        .map(|(g, params)| -> Result<Option<f64>> {
            let mut total = 0.0;
            let mut used = 0usize;
            for (f, (train, val)) in splits.iter().enumerate() {
                if !usable[f] {
                    continue;
                }
                let task = stream.child((g * k + f) as u64 + 1);
                let pred = match predict(params, train, val, task) {
                    Ok(p) => p,
                    Err(e) => {
                        log::warn!("fold {f} failed for a grid point: {e}");
                        continue;
                    }
                };
                if pred.len() != val.len() {
                    return Err(Error::LengthMismatch(pred.len(), val.len()));
                }
                let wrong = pred.iter().zip(val).filter(|(p, &i)| **p != y[i]).count();
                total += wrong as f64 / val.len() as f64;
                used += 1;
            }
            Ok((used > 0).then(|| total / used as f64))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<usize> = None;
    for (g, s) in scores.iter().enumerate() {
        let Some(s) = s else { continue };
        best = match best {
            None => Some(g),
            Some(b) => {
                let sb = scores[b].expect("scored");
                if *s < sb || (*s == sb && grid[g] < grid[b]) {
                    Some(g)
                } else {
                    Some(b)
                }
            }
        };
    }
    let b = best.ok_or_else(|| Error::InvalidInput("no grid point could be cross-validated".into()))?;
    Ok(CvResult {
        best: grid[b].clone(),
        cve: scores[b].expect("scored"),
        grid: grid.iter().cloned().zip(scores).collect(),
    })
}
