use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::spatial::NeighborOrder;

/// Covariates at every location, with the training mean standing in for
/// cells that fall outside the observed grid.
#[derive(Debug, Clone)]
pub struct CovariateField {
    pub rows: Vec<Vec<f64>>,
    pub coords: Vec<(usize, usize)>,
    pub fill: Vec<f64>,
    lookup: HashMap<(usize, usize), usize>,
}

/// The focal cell followed by its eight surrounding cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub covariates: Vec<Vec<f64>>,
    pub points: Vec<[f64; 2]>,
    /// Number of cells that were imputed.
    pub imputed: usize,
}

impl CovariateField {
    pub fn from_dataset(data: &Dataset) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..data.n()).map(|i| data.covariate_row(i)).collect();
        let train = data.train_indices();
        if train.is_empty() {
            return Err(Error::InvalidInput("no training locations".into()));
        }
        let d = rows.first().map_or(0, Vec::len);
        let fill = (0..d)
            .map(|j| train.iter().map(|&i| rows[i][j]).sum::<f64>() / train.len() as f64)
            .collect();
        Ok(Self {
            rows,
            coords: data.coords.clone(),
            fill,
            lookup: data.location_lookup(),
        })
    }

    pub fn dim(&self) -> usize {
        self.fill.len()
    }

    pub fn site_at(&self, row: i64, col: i64) -> Option<usize> {
        if row < 0 || col < 0 {
            return None;
        }
        self.lookup.get(&(row as usize, col as usize)).copied()
    }

    pub fn point(&self, site: usize) -> [f64; 2] {
        let (r, c) = self.coords[site];
        [r as f64, c as f64]
    }

    /// Second-order neighbours present in the field.
    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let (r, c) = self.coords[site];
        NeighborOrder::Second
            .offsets()
            .iter()
            .filter_map(|&(dr, dc)| self.site_at(r as i64 + dr, c as i64 + dc))
            .collect()
    }

    /// 3 x 3 window centred on `site`.
    pub fn window(&self, site: usize) -> Window {
        let (r, c) = self.coords[site];
        let mut covariates = vec![self.rows[site].clone()];
        let mut points = vec![[r as f64, c as f64]];
        let mut imputed = 0;
        for &(dr, dc) in NeighborOrder::Second.offsets() {
            let (rr, cc) = (r as i64 + dr, c as i64 + dc);
            points.push([rr as f64, cc as f64]);
            match self.site_at(rr, cc) {
                Some(j) => covariates.push(self.rows[j].clone()),
                None => {
                    covariates.push(self.fill.clone());
                    imputed += 1;
                }
            }
        }
        Window {
            covariates,
            points,
            imputed,
        }
    }
}
