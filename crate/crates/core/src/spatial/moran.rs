use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SpdFactor};

/// Moran operator `M = P A P` and its leading eigenvectors within the
/// orthogonal complement of the design.
#[derive(Debug, Clone)]
pub struct MoranBasis {
    pub operator: Mat<f64>,
    /// `n x r`, columns ordered by descending eigenvalue.
    pub vectors: Mat<f64>,
    pub values: Vec<f64>,
}

/// Default basis size: ten percent of the locations, rounded up.
pub fn default_rank(n: usize) -> usize {
    rank_for_fraction(n, 0.10)
}

pub fn rank_for_fraction(n: usize, frac: f64) -> usize {
    ((n as f64 * frac) - 1e-9).ceil().max(0.0) as usize
}

/// Builds the Moran basis with `r = ceil(0.10 n)`.
pub fn moran_operator(x: MatRef<'_, f64>, adjacency: MatRef<'_, f64>) -> Result<MoranBasis> {
    moran_operator_rank(x, adjacency, default_rank(x.nrows()))
}

/// Builds the Moran basis keeping `r` eigenvectors.
///
/// Eigenvectors are taken from `M - c H` with `H` the hat matrix of `X` and `c`
/// above the spectral radius of `M`, which sends `col(X)` to the bottom of the
/// spectrum; the returned vectors are therefore orthogonal to every column of `X`.
pub fn moran_operator_rank(x: MatRef<'_, f64>, adjacency: MatRef<'_, f64>, r: usize) -> Result<MoranBasis> {
    let n = x.nrows();
    let l = x.ncols();
    if adjacency.nrows() != n || adjacency.ncols() != n {
        return Err(Error::LengthMismatch(adjacency.nrows(), n));
    }
    if l >= n {
        return Err(Error::RankDeficient(format!("design has {l} columns for {n} rows")));
    }
    if r > n - l {
        return Err(Error::InvalidInput(format!(
            "requested {r} Moran eigenvectors but only {} are orthogonal to the design",
            n - l
        )));
    }
    let xtx = x.transpose() * x;
    let factor = SpdFactor::new(xtx.as_ref(), "X'X").map_err(|_| Error::RankDeficient("X'X is singular".into()))?;
    let hat = x * factor.solve(x.transpose());
    // Guard against numerically singular X'X.
    let trace: f64 = (0..n).map(|i| hat[(i, i)]).sum();
    if (trace - l as f64).abs() > 1e-6 {
        return Err(Error::RankDeficient("X'X is numerically singular".into()));
    }
    let p = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - hat[(i, j)]);
    let pa = &p * adjacency;
    let mut m = &pa * &p;
    crate::linalg::symmetrize_in_place(&mut m);

    let radius = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let shift = radius + 1.0;
    let shifted = Mat::from_fn(n, n, |i, j| m[(i, j)] - shift * hat[(i, j)]);
    let (vals, vecs) = symmetric_eigen(shifted.as_ref(), "Moran operator")?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let chosen = &order[..r];

    let mut vectors = Mat::<f64>::zeros(n, r);
    for (c, &k) in chosen.iter().enumerate() {
        let v: Vec<f64> = (0..n).map(|i| vecs[(i, k)]).collect();
        // Re-project to remove round-off leakage into col(X).
        let mut pv: Vec<f64> = (0..n).map(|i| (0..n).map(|j| p[(i, j)] * v[j]).sum()).collect();
        let norm = pv.iter().map(|a| a * a).sum::<f64>().sqrt();
        let pivot = pv
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map_or(1.0, |(_, val)| val.signum());
        for e in pv.iter_mut() {
            *e *= pivot / norm;
        }
        for i in 0..n {
            vectors[(i, c)] = pv[i];
        }
    }
    let values = chosen.iter().map(|&k| vals[k]).collect();
    Ok(MoranBasis {
        operator: m,
        vectors,
        values,
    })
}
