//! Thin helpers over `faer` used throughout the crate.

use faer::linalg::solvers::{DenseSolveCore, Llt};
use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::prelude::*;
use faer::{Par, Side};

use crate::error::{Error, Result};

/// Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    llt: Llt<f64>,
}

impl SpdFactor {
    pub fn new(m: MatRef<'_, f64>, context: &str) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "{context}: matrix is {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !all_finite(m) {
            return Err(Error::NotPositiveDefinite(format!("{context}: non-finite entries")));
        }
        let llt = m
            .llt(Side::Lower)
            .map_err(|_| Error::NotPositiveDefinite(context.to_string()))?;
        Ok(Self { llt })
    }

    pub fn dim(&self) -> usize {
        self.llt.L().nrows()
    }

    pub fn lower(&self) -> MatRef<'_, f64> {
        self.llt.L()
    }

    pub fn log_det(&self) -> f64 {
        let l = self.llt.L();
        (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
    }

    /// Returns `L^{-1} b`.
    pub fn whiten(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        solve_lower_triangular_in_place(self.llt.L(), rhs.as_mut(), Par::Seq);
        rhs.col_as_slice(0).to_vec()
    }

    /// Returns `L^{-T} u`; for standard normal `u` this has covariance `M^{-1}`.
    pub fn unwhiten_precision(&self, u: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(u.len(), 1, |i, _| u[i]);
        solve_upper_triangular_in_place(self.llt.L().transpose(), rhs.as_mut(), Par::Seq);
        rhs.col_as_slice(0).to_vec()
    }

    /// Returns `b' M^{-1} b`.
    pub fn quad_form(&self, b: &[f64]) -> f64 {
        self.whiten(b).iter().map(|v| v * v).sum()
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.llt.solve(&rhs);
        x.col_as_slice(0).to_vec()
    }

    pub fn solve(&self, b: MatRef<'_, f64>) -> Mat<f64> {
        self.llt.solve(b)
    }

    pub fn inverse(&self) -> Mat<f64> {
        let mut inv = self.llt.inverse();
        symmetrize_in_place(&mut inv);
        inv
    }

    /// Returns `L u`.
    pub fn mul_lower(&self, u: &[f64]) -> Vec<f64> {
        let l = self.llt.L();
        let n = l.nrows();
        let mut out = vec![0.0; n];
        for j in 0..n {
            let uj = u[j];
            if uj == 0.0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate().skip(j) {
                *o += l[(i, j)] * uj;
            }
        }
        out
    }
}

pub fn all_finite(m: MatRef<'_, f64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].is_finite()))
}

/// Replaces `m` with `(m + m') / 2`.
pub fn symmetrize_in_place(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub fn max_asymmetry(m: MatRef<'_, f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Builds a dense matrix from row-major nested vectors.
pub fn mat_from_rows(rows: &[Vec<f64>]) -> Mat<f64> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    Mat::from_fn(nrows, ncols, |i, j| rows[i][j])
}

pub fn mat_to_rows(m: MatRef<'_, f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// `m v` for a dense matrix and a slice.
pub fn mat_vec(m: MatRef<'_, f64>, v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(m.ncols(), v.len());
    let mut out = vec![0.0; m.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * vj;
        }
    }
    out
}

/// `m' v`.
pub fn mat_t_vec(m: MatRef<'_, f64>, v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(m.nrows(), v.len());
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)] * v[i]).sum())
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rows of `m` at `idx`.
pub fn select_rows(m: MatRef<'_, f64>, idx: &[usize]) -> Mat<f64> {
    Mat::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}

/// Principal submatrix `m[idx, idx]`.
pub fn select_square(m: MatRef<'_, f64>, idx: &[usize]) -> Mat<f64> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

pub fn select_block(m: MatRef<'_, f64>, rows: &[usize], cols: &[usize]) -> Mat<f64> {
    Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Inverse of a general square matrix through partial-pivot LU.
pub fn general_inverse(m: MatRef<'_, f64>, context: &str) -> Result<Mat<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidInput(format!("{context}: matrix is not square")));
    }
    let lu = m.partial_piv_lu();
    let inv = lu.inverse();
    if !all_finite(inv.as_ref()) {
        return Err(Error::Singular(context.to_string()));
    }
    // Reject numerically singular inputs: `m * inv` must reproduce the identity.
    let check = m * &inv;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((check[(i, j)] - target).abs());
        }
    }
    if worst > 1e-6 {
        return Err(Error::Singular(context.to_string()));
    }
    Ok(inv)
}

/// Symmetric eigendecomposition; eigenvalues ascending as returned by faer.
pub fn symmetric_eigen(m: MatRef<'_, f64>, context: &str) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NonConvergence {
            what: "symmetric eigensolver",
            iterations: 0,
        })
        .map_err(|e| Error::InvalidInput(format!("{context}: {e}")))?;
    let s = evd.S();
    let values: Vec<f64> = (0..m.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}
