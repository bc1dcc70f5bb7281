use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::spatial::{GridDomain, NeighborOrder};

/// Clumped hold-out set: random seed cells plus random subsets of their eight neighbours.
///
/// Neighbour offsets are drawn as if the lattice extended beyond the grid;
/// cells that fall outside are then dropped along with repeats. Seeds are
/// part of the test set.
pub fn clustered_test_split<R: Rng + ?Sized>(
    domain: &GridDomain,
    n_seeds: usize,
    per_seed: usize,
    rng: &mut R,
) -> Result<Vec<bool>> {
    if domain.rows() < 3 || domain.cols() < 3 {
        return Err(Error::InvalidInput("clustered split needs at least a 3 x 3 grid".into()));
    }
    let n = domain.len();
    if n_seeds == 0 || n_seeds > n {
        return Err(Error::InvalidInput(format!("cannot draw {n_seeds} seeds from {n} cells")));
    }
    let offsets = NeighborOrder::Second.offsets();
    if per_seed > offsets.len() {
        return Err(Error::InvalidInput(format!("at most {} neighbours per seed", offsets.len())));
    }
    let mut mask = vec![false; n];
    for seed in sample(rng, n, n_seeds) {
        mask[seed] = true;
        let (r, c) = domain.coords()[seed];
        for k in sample(rng, offsets.len(), per_seed) {
            let (dr, dc) = offsets[k];
            if let Some(j) = domain.index_signed(r as i64 + dr, c as i64 + dc) {
                mask[j] = true;
            }
        }
    }
    Ok(mask)
}

/// Simple random hold-out of `n_test` cells.
pub fn random_test_split<R: Rng + ?Sized>(n: usize, n_test: usize, rng: &mut R) -> Result<Vec<bool>> {
    if n_test > n {
        return Err(Error::InvalidInput(format!("cannot hold out {n_test} of {n} cells")));
    }
    let mut mask = vec![false; n];
    for i in sample(rng, n, n_test) {
        mask[i] = true;
    }
    Ok(mask)
}

pub fn test_fraction(mask: &[bool]) -> f64 {
    mask.iter().filter(|&&m| m).count() as f64 / mask.len().max(1) as f64
}
