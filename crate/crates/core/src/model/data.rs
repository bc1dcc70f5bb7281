use std::collections::HashMap;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{GridDomain, NeighborOrder, NeighborhoodMatrix};

/// Binary responses, covariates and locations with a train/test partition.
///
/// `x` includes the intercept column when `has_intercept` is set. A response of
/// `None` marks a location that is never observed; `test_mask` hides observed
/// responses from fitting.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub y: Vec<Option<u8>>,
    pub x: Mat<f64>,
    pub column_names: Vec<String>,
    pub has_intercept: bool,
    pub coords: Vec<(usize, usize)>,
    pub test_mask: Vec<bool>,
}

/// Column centring and scaling applied to non-intercept covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Dataset {
    pub fn new(
        y: Vec<Option<u8>>,
        x: Mat<f64>,
        column_names: Vec<String>,
        has_intercept: bool,
        coords: Vec<(usize, usize)>,
        test_mask: Vec<bool>,
    ) -> Result<Self> {
        let n = y.len();
        if x.nrows() != n {
            return Err(Error::LengthMismatch(x.nrows(), n));
        }
        if coords.len() != n {
            return Err(Error::LengthMismatch(coords.len(), n));
        }
        if test_mask.len() != n {
            return Err(Error::LengthMismatch(test_mask.len(), n));
        }
        if column_names.len() != x.ncols() {
            return Err(Error::LengthMismatch(column_names.len(), x.ncols()));
        }
        if let Some(bad) = y.iter().flatten().find(|&&v| v > 1) {
            return Err(Error::InvalidInput(format!("responses must be 0 or 1, found {bad}")));
        }
        for j in 0..x.ncols() {
            for i in 0..n {
                if !x[(i, j)].is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "covariate `{}` is not finite at row {i}",
                        column_names[j]
                    )));
                }
            }
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, c) in coords.iter().enumerate() {
            if let Some(prev) = seen.insert(*c, i) {
                return Err(Error::InvalidInput(format!(
                    "locations {prev} and {i} share coordinates {c:?}"
                )));
            }
        }
        Ok(Self {
            y,
            x,
            column_names,
            has_intercept,
            coords,
            test_mask,
        })
    }

    /// Prepends an intercept column to raw covariates `x1..xk`.
    pub fn with_intercept(
        y: Vec<Option<u8>>,
        covariates: &Mat<f64>,
        names: &[String],
        coords: Vec<(usize, usize)>,
        test_mask: Vec<bool>,
    ) -> Result<Self> {
        let n = covariates.nrows();
        let k = covariates.ncols();
        let x = Mat::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { covariates[(i, j - 1)] });
        let mut column_names = vec!["intercept".to_string()];
        column_names.extend(names.iter().cloned());
        Self::new(y, x, column_names, true, coords, test_mask)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Locations used for fitting: observed and not held out.
    pub fn train_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.test_mask[i] && self.y[i].is_some()).collect()
    }

    pub fn test_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.test_mask[i]).collect()
    }

    /// Held-out or unobserved locations, i.e. everything the fit must predict.
    pub fn prediction_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.test_mask[i] || self.y[i].is_none()).collect()
    }

    pub fn responses(&self, idx: &[usize]) -> Result<Vec<u8>> {
        idx.iter()
            .map(|&i| self.y[i].ok_or_else(|| Error::InvalidInput(format!("location {i} has no response"))))
            .collect()
    }

    /// Covariate columns without the intercept.
    pub fn covariate_columns(&self) -> Vec<usize> {
        let start = usize::from(self.has_intercept);
        (start..self.p()).collect()
    }

    pub fn covariates(&self) -> Mat<f64> {
        let cols = self.covariate_columns();
        Mat::from_fn(self.n(), cols.len(), |i, j| self.x[(i, cols[j])])
    }

    pub fn covariate_row(&self, i: usize) -> Vec<f64> {
        self.covariate_columns().iter().map(|&j| self.x[(i, j)]).collect()
    }

    pub fn design_row(&self, i: usize) -> Vec<f64> {
        (0..self.p()).map(|j| self.x[(i, j)]).collect()
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.coords.iter().map(|&(r, c)| [r as f64, c as f64]).collect()
    }

    /// Bounding grid dimensions `(rows, cols)`.
    pub fn extent(&self) -> (usize, usize) {
        let rows = self.coords.iter().map(|c| c.0 + 1).max().unwrap_or(0);
        let cols = self.coords.iter().map(|c| c.1 + 1).max().unwrap_or(0);
        (rows, cols)
    }

    /// Whether the locations fill their bounding grid in row-major order.
    pub fn is_full_grid(&self) -> bool {
        let (rows, cols) = self.extent();
        rows * cols == self.n()
            && self.coords.iter().enumerate().all(|(i, &(r, c))| r * cols + c == i)
    }

    pub fn domain(&self) -> Option<GridDomain> {
        let (rows, cols) = self.extent();
        self.is_full_grid().then(|| GridDomain::new(rows, cols).ok()).flatten()
    }

    /// Index of the location at `(row, col)` if present.
    pub fn location_lookup(&self) -> HashMap<(usize, usize), usize> {
        self.coords.iter().enumerate().map(|(i, &c)| (c, i)).collect()
    }

    /// Lattice adjacency among the dataset's locations.
    pub fn neighbors(&self, order: NeighborOrder) -> NeighborhoodMatrix {
        let n = self.n();
        let lookup = self.location_lookup();
        let mut a = Mat::<f64>::zeros(n, n);
        for (i, &(r, c)) in self.coords.iter().enumerate() {
            for &(dr, dc) in order.offsets() {
                let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                if rr < 0 || cc < 0 {
                    continue;
                }
                if let Some(&j) = lookup.get(&(rr as usize, cc as usize)) {
                    a[(i, j)] = 1.0;
                }
            }
        }
        NeighborhoodMatrix::from_adjacency(a).expect("lattice adjacency is symmetric")
    }

    /// Centres and scales every non-intercept column using all locations.
    pub fn standardize(&mut self) -> Result<Standardization> {
        let n = self.n() as f64;
        let mut means = Vec::new();
        let mut sds = Vec::new();
        for j in self.covariate_columns() {
            let m = (0..self.n()).map(|i| self.x[(i, j)]).sum::<f64>() / n;
            let v = (0..self.n()).map(|i| (self.x[(i, j)] - m).powi(2)).sum::<f64>() / (n - 1.0);
            let sd = v.sqrt();
            if !(sd > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "covariate `{}` is constant and cannot be scaled",
                    self.column_names[j]
                )));
            }
            for i in 0..self.n() {
                self.x[(i, j)] = (self.x[(i, j)] - m) / sd;
            }
            means.push(m);
            sds.push(sd);
        }
        Ok(Standardization { means, sds })
    }

    /// Rejects training sets whose responses are all one class.
    pub fn check_training_response(&self) -> Result<()> {
        let idx = self.train_indices();
        if idx.is_empty() {
            return Err(Error::InvalidInput("no training locations".into()));
        }
        let y = self.responses(&idx)?;
        let ones = y.iter().filter(|&&v| v == 1).count();
        if ones == 0 {
            return Err(Error::DegenerateResponse(y.len(), 0));
        }
        if ones == y.len() {
            return Err(Error::DegenerateResponse(y.len(), 1));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let cov = Mat::from_fn(4, 1, |i, _| i as f64);
        Dataset::with_intercept(
            vec![Some(0), Some(1), None, Some(1)],
            &cov,
            &["x1".into()],
            vec![(0, 0), (0, 1), (1, 0), (1, 1)],
            vec![false, false, false, true],
        )
        .unwrap()
    }

    #[test]
    fn partitions() {
        let d = toy();
        assert_eq!(d.train_indices(), vec![0, 1]);
        assert_eq!(d.test_indices(), vec![3]);
        assert_eq!(d.prediction_indices(), vec![2, 3]);
        assert!(d.is_full_grid());
        assert_eq!(d.neighbors(NeighborOrder::Second).degree(0), 3);
    }

    #[test]
    fn standardize_centres() {
        let mut d = toy();
        let s = d.standardize().unwrap();
        assert_eq!(s.means, vec![1.5]);
        let m: f64 = (0..4).map(|i| d.x[(i, 1)]).sum();
        assert!(m.abs() < 1e-12);
        assert_eq!(d.x[(0, 0)], 1.0);
    }

    #[test]
    fn degenerate_response() {
        let mut d = toy();
        d.y[0] = Some(1);
        assert!(matches!(d.check_training_response(), Err(Error::DegenerateResponse(2, 1))));
    }

    #[test]
    fn duplicate_coordinates_rejected() {
        let cov = Mat::<f64>::zeros(2, 0);
        assert!(Dataset::with_intercept(vec![Some(0), Some(1)], &cov, &[], vec![(0, 0), (0, 0)], vec![false; 2]).is_err());
    }
}
