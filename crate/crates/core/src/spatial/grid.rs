use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular lattice; location `i` sits at `(i / cols, i % cols)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDomain {
    rows: usize,
    cols: usize,
    coords: Vec<(usize, usize)>,
}

impl GridDomain {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!("grid must be at least 1x1, got {rows}x{cols}")));
        }
        let coords = (0..rows * cols).map(|i| (i / cols, i % cols)).collect();
        Ok(Self { rows, cols, coords })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[(usize, usize)] {
        &self.coords
    }

    pub fn index(&self, row: usize, col: usize) -> Option<usize> {
        (row < self.rows && col < self.cols).then_some(row * self.cols + col)
    }

    /// Index for signed coordinates, `None` when outside the grid.
    pub fn index_signed(&self, row: i64, col: i64) -> Option<usize> {
        if row < 0 || col < 0 {
            return None;
        }
        self.index(row as usize, col as usize)
    }

    /// Coordinates as floating point `(row, col)` pairs.
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.coords.iter().map(|&(r, c)| [r as f64, c as f64]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborOrder {
    /// Rook adjacency: cells sharing an edge.
    First,
    /// Queen adjacency: cells sharing an edge or a corner.
    Second,
}

impl NeighborOrder {
    pub fn offsets(self) -> &'static [(i64, i64)] {
        const ROOK: [(i64, i64); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const QUEEN: [(i64, i64); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        match self {
            NeighborOrder::First => &ROOK,
            NeighborOrder::Second => &QUEEN,
        }
    }
}

/// Binary adjacency `A` with its row-standardised weights `W`.
#[derive(Debug, Clone)]
pub struct NeighborhoodMatrix {
    adjacency: Mat<f64>,
    weights: Mat<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl NeighborhoodMatrix {
    /// Validates a symmetric 0/1 adjacency with zero diagonal and row-standardises it.
    pub fn from_adjacency(adjacency: Mat<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(Error::InvalidInput("adjacency matrix must be square".into()));
        }
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!("adjacency has nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let a = adjacency[(i, j)];
                if a != 0.0 && a != 1.0 {
                    return Err(Error::InvalidInput(format!("adjacency entry ({i},{j}) = {a} is not binary")));
                }
                if a != adjacency[(j, i)] {
                    return Err(Error::InvalidInput(format!("adjacency is not symmetric at ({i},{j})")));
                }
                if a == 1.0 {
                    neighbors[i].push(j);
                }
            }
        }
        let weights = Mat::from_fn(n, n, |i, j| {
            if adjacency[(i, j)] == 1.0 {
                1.0 / neighbors[i].len() as f64
            } else {
                0.0
            }
        });
        Ok(Self {
            adjacency,
            weights,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &Mat<f64> {
        &self.adjacency
    }

    pub fn weights(&self) -> &Mat<f64> {
        &self.weights
    }

    /// Neighbour indices of location `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }
}

/// Builds rook (first order) or queen (second order) adjacency on a grid.
pub fn build_grid_neighbors(domain: &GridDomain, order: NeighborOrder) -> NeighborhoodMatrix {
    let n = domain.len();
    let mut a = Mat::<f64>::zeros(n, n);
    for (i, &(r, c)) in domain.coords().iter().enumerate() {
        for &(dr, dc) in order.offsets() {
            if let Some(j) = domain.index_signed(r as i64 + dr, c as i64 + dc) {
                a[(i, j)] = 1.0;
            }
        }
    }
    NeighborhoodMatrix::from_adjacency(a).expect("grid adjacency is valid by construction")
}
