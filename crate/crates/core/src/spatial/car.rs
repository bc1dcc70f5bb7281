use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use super::grid::NeighborhoodMatrix;
use crate::error::{Error, Result};
use crate::linalg::{general_inverse, symmetric_eigen, symmetrize_in_place};

fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::InvalidInput(format!("rho must lie in [0, 1), got {rho}")));
    }
    if rho >= 1.0 {
        return Err(Error::Singular(format!("I - rho W is singular for rho = {rho} >= 1")));
    }
    Ok(())
}

/// Returns the symmetrised CAR dependence `((I - rho W)^{-1} + (I - rho W)^{-T}) / 2`.
pub fn car_dependence(w: MatRef<'_, f64>, rho: f64) -> Result<Mat<f64>> {
    check_rho(rho)?;
    let n = w.nrows();
    let m = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - rho * w[(i, j)]);
    let mut k = general_inverse(m.as_ref(), "I - rho W")?;
    symmetrize_in_place(&mut k);
    Ok(k)
}

/// Spectral form of the symmetrised CAR dependence for a fixed neighbourhood.
///
/// With `S = D^{-1/2} A D^{-1/2} = U diag(lambda) U'`, the inverse
/// `(I - rho W)^{-1}` equals `D^{-1/2} U diag(1 / (1 - rho lambda)) U' D^{1/2}`,
/// so any block of the symmetrised matrix costs one product per `rho`.
#[derive(Debug, Clone)]
pub struct CarSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
    sqrt_degree: Vec<f64>,
}

impl CarSpectrum {
    pub fn new(neighbors: &NeighborhoodMatrix) -> Result<Self> {
        let n = neighbors.n();
        let sqrt_degree: Vec<f64> = (0..n)
            .map(|i| match neighbors.degree(i) {
                0 => 1.0,
                d => (d as f64).sqrt(),
            })
            .collect();
        let a = neighbors.adjacency();
        let s = Mat::from_fn(n, n, |i, j| a[(i, j)] / (sqrt_degree[i] * sqrt_degree[j]));
        let (eigenvalues, eigenvectors) = symmetric_eigen(s.as_ref(), "normalised adjacency")?;
        Ok(Self {
            eigenvalues,
            eigenvectors,
            sqrt_degree,
        })
    }

    pub fn n(&self) -> usize {
        self.sqrt_degree.len()
    }

    /// Block `K_sym[rows, cols]` at `rho`.
    pub fn dependence_block(&self, rho: f64, rows: &[usize], cols: &[usize]) -> Result<Mat<f64>> {
        check_rho(rho)?;
        let n = self.n();
        for &i in rows.iter().chain(cols) {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
        }
        let u = &self.eigenvectors;
        let scale: Vec<f64> = self.eigenvalues.iter().map(|&l| 1.0 / (1.0 - rho * l)).collect();
        let left = Mat::from_fn(rows.len(), n, |a, k| u[(rows[a], k)] * scale[k]);
        let right_t = Mat::from_fn(n, cols.len(), |k, b| u[(cols[b], k)]);
        let mut g = Mat::<f64>::zeros(rows.len(), cols.len());
        matmul(g.as_mut(), Accum::Replace, left.as_ref(), right_t.as_ref(), 1.0, Par::Seq);
        let d = &self.sqrt_degree;
        for b in 0..cols.len() {
            let db = d[cols[b]];
            for a in 0..rows.len() {
                let da = d[rows[a]];
                g[(a, b)] *= 0.5 * (db / da + da / db);
            }
        }
        Ok(g)
    }

    /// Diagonal entries `K_sym[i, i]` for the given sites.
    pub fn dependence_block_diag(&self, rho: f64, sites: &[usize]) -> Result<Vec<f64>> {
        check_rho(rho)?;
        let n = self.n();
        let u = &self.eigenvectors;
        let scale: Vec<f64> = self.eigenvalues.iter().map(|&l| 1.0 / (1.0 - rho * l)).collect();
        sites
            .iter()
            .map(|&i| {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, len: n });
                }
                Ok((0..n).map(|k| u[(i, k)] * u[(i, k)] * scale[k]).sum())
            })
            .collect()
    }

    pub fn dependence(&self, rho: f64) -> Result<Mat<f64>> {
        let all: Vec<usize> = (0..self.n()).collect();
        let mut k = self.dependence_block(rho, &all, &all)?;
        symmetrize_in_place(&mut k);
        Ok(k)
    }
}

/// `gamma2 ((1 - kappa) I + kappa K)`.
pub fn assemble_sigma_star(k: MatRef<'_, f64>, kappa: f64, gamma2: f64) -> Result<Mat<f64>> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidInput(format!("kappa must lie in [0, 1], got {kappa}")));
    }
    if !(gamma2 > 0.0 && gamma2.is_finite()) {
        return Err(Error::InvalidInput(format!("gamma2 must be positive, got {gamma2}")));
    }
    let n = k.nrows();
    Ok(Mat::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 - kappa } else { 0.0 };
        gamma2 * (identity + kappa * k[(i, j)])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_asymmetry, SpdFactor};
    use crate::spatial::grid::{build_grid_neighbors, GridDomain, NeighborOrder};

    fn pair() -> NeighborhoodMatrix {
        build_grid_neighbors(&GridDomain::new(1, 2).unwrap(), NeighborOrder::First)
    }

    #[test]
    fn rho_zero_is_identity() {
        let nb = build_grid_neighbors(&GridDomain::new(3, 3).unwrap(), NeighborOrder::Second);
        let k = car_dependence(nb.weights().as_ref(), 0.0).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((k[(i, j)] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_site_closed_form() {
        let k = car_dependence(pair().weights().as_ref(), 0.5).unwrap();
        assert!((k[(0, 0)] - 4.0 / 3.0).abs() < 1e-12);
        assert!((k[(0, 1)] - 2.0 / 3.0).abs() < 1e-12);
        assert!((k[(1, 1)] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rho_at_one_is_singular() {
        assert!(matches!(
            car_dependence(pair().weights().as_ref(), 1.0),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn large_grid_high_rho_is_pd() {
        let nb = build_grid_neighbors(&GridDomain::new(20, 20).unwrap(), NeighborOrder::Second);
        let k = car_dependence(nb.weights().as_ref(), 0.99).unwrap();
        assert_eq!(max_asymmetry(k.as_ref()), 0.0);
        assert!(SpdFactor::new(k.as_ref(), "K").is_ok());
        let (vals, _) = symmetric_eigen(k.as_ref(), "K").unwrap();
        assert!(vals[0] > 0.0);
    }

    #[test]
    fn spectrum_matches_direct_inverse() {
        let nb = build_grid_neighbors(&GridDomain::new(5, 4).unwrap(), NeighborOrder::Second);
        let spec = CarSpectrum::new(&nb).unwrap();
        for &rho in &[0.0, 0.3, 0.9, 0.999] {
            let direct = car_dependence(nb.weights().as_ref(), rho).unwrap();
            let fast = spec.dependence(rho).unwrap();
            for i in 0..20 {
                for j in 0..20 {
                    let tol = 1e-9 * direct[(i, j)].abs().max(1.0);
                    assert!((direct[(i, j)] - fast[(i, j)]).abs() < tol, "rho {rho} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn spectrum_block_matches_full() {
        let nb = build_grid_neighbors(&GridDomain::new(4, 4).unwrap(), NeighborOrder::First);
        let spec = CarSpectrum::new(&nb).unwrap();
        let full = spec.dependence(0.7).unwrap();
        let rows = [3, 0, 9];
        let cols = [1, 15];
        let block = spec.dependence_block(0.7, &rows, &cols).unwrap();
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                assert!((block[(a, b)] - full[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sigma_star_examples() {
        let k = Mat::from_fn(2, 2, |i, j| if i == j { 4.0 / 3.0 } else { 2.0 / 3.0 });
        let s = assemble_sigma_star(k.as_ref(), 0.0, 1.0).unwrap();
        assert_eq!(s[(0, 1)], 0.0);
        assert_eq!(s[(0, 0)], 1.0);
        let s = assemble_sigma_star(k.as_ref(), 1.0, 1.0).unwrap();
        assert!((s[(0, 1)] - 2.0 / 3.0).abs() < 1e-15);
        let s = assemble_sigma_star(k.as_ref(), 0.5, 2.0).unwrap();
        assert!((s[(0, 0)] - 7.0 / 3.0).abs() < 1e-12);
        assert!((s[(0, 1)] - 2.0 / 3.0).abs() < 1e-12);
        assert!(assemble_sigma_star(k.as_ref(), 1.2, 1.0).is_err());
    }
}
