use faer::Mat;

use crate::error::{Error, Result};

/// `exp(-d_ij / theta)` on Euclidean distances between points.
pub fn exponential_correlation(points: &[[f64; 2]], theta: f64) -> Result<Mat<f64>> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidInput(format!("range theta must be positive, got {theta}")));
    }
    let n = points.len();
    Ok(Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            (-distance(points[i], points[j]) / theta).exp()
        }
    }))
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
