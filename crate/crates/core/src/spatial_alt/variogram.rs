use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::distance;

pub const THETA_MIN: f64 = 0.1;
pub const THETA_MAX: f64 = 20.0;
const N_BINS: usize = 10;

/// Binned empirical semivariogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalVariogram {
    /// Mean pair distance per non-empty bin.
    pub lags: Vec<f64>,
    pub semivariance: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Exponential model `c (1 - exp(-d / theta))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramFit {
    pub sill: f64,
    pub theta: f64,
    pub sse: f64,
}

/// Semivariogram pooled over standardised columns of `values` (one row per location).
pub fn empirical_variogram(values: &[Vec<f64>], points: &[[f64; 2]]) -> Result<EmpiricalVariogram> {
    let n = values.len();
    if points.len() != n {
        return Err(Error::LengthMismatch(points.len(), n));
    }
    if n < 20 {
        return Err(Error::InvalidInput(format!("variogram needs at least 20 locations, got {n}")));
    }
    let d = values[0].len();
    let mut cols = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<f64> = values.iter().map(|r| r[j]).collect();
        let m = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        if sd > 1e-12 * m.abs().max(1.0) {
            cols.push(col.into_iter().map(|v| (v - m) / sd).collect::<Vec<f64>>());
        }
    }
    if cols.is_empty() {
        return Err(Error::DegenerateVariogram);
    }
    let mut max_d: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            max_d = max_d.max(distance(points[i], points[j]));
        }
    }
    let cutoff = 0.5 * max_d;
    if cutoff <= 0.0 {
        return Err(Error::DegenerateVariogram);
    }
    let width = cutoff / N_BINS as f64;
    let mut sum = [0.0; N_BINS];
    let mut lag = [0.0; N_BINS];
    let mut cnt = [0usize; N_BINS];
    for i in 0..n {
        for j in (i + 1)..n {
            let h = distance(points[i], points[j]);
            if h > cutoff {
                continue;
            }
            let b = ((h / width) as usize).min(N_BINS - 1);
            let sq: f64 = cols.iter().map(|c| (c[i] - c[j]).powi(2)).sum::<f64>() / cols.len() as f64;
            sum[b] += 0.5 * sq;
            lag[b] += h;
            cnt[b] += 1;
        }
    }
    let keep: Vec<usize> = (0..N_BINS).filter(|&b| cnt[b] > 0).collect();
    Ok(EmpiricalVariogram {
        lags: keep.iter().map(|&b| lag[b] / cnt[b] as f64).collect(),
        semivariance: keep.iter().map(|&b| sum[b] / cnt[b] as f64).collect(),
        counts: keep.iter().map(|&b| cnt[b]).collect(),
    })
}

/// Least squares with the sill profiled out for a given `theta`.
fn profile(v: &EmpiricalVariogram, theta: f64) -> (f64, f64) {
    let (mut gg, mut gy, mut yy) = (0.0, 0.0, 0.0);
    for (&h, &y) in v.lags.iter().zip(&v.semivariance) {
        let g = 1.0 - (-h / theta).exp();
        gg += g * g;
        gy += g * y;
        yy += y * y;
    }
    let c = if gg > 0.0 { gy / gg } else { 0.0 };
    (c, yy - c * gy)
}

pub fn fit_exponential(v: &EmpiricalVariogram) -> Result<VariogramFit> {
    if v.lags.len() < 2 {
        return Err(Error::DegenerateVariogram);
    }
    let (lo, hi) = (THETA_MIN.ln(), THETA_MAX.ln());
    let steps = 200;
    let grid: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let sse = |lt: f64| profile(v, lt.exp()).1;
    let best = (0..grid.len())
        .min_by(|&a, &b| sse(grid[a]).total_cmp(&sse(grid[b])))
        .expect("grid is non-empty");
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(steps)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if sse(c) <= sse(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let mut lt = 0.5 * (a + b);
    if sse(grid[best]) < sse(lt) {
        lt = grid[best];
    }
    let theta = lt.exp().clamp(THETA_MIN, THETA_MAX);
    let (sill, sse) = profile(v, theta);
    Ok(VariogramFit { sill, theta, sse })
}

/// Exponential range of one covariate.
pub fn variogram_fit(values: &[f64], points: &[[f64; 2]]) -> Result<f64> {
    let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
    variogram_fit_multi(&rows, points)
}

/// Exponential range from the semivariogram pooled over standardised covariates.
pub fn variogram_fit_multi(values: &[Vec<f64>], points: &[[f64; 2]]) -> Result<f64> {
    Ok(fit_exponential(&empirical_variogram(values, points)?)?.theta)
}

/// Falls back to the lower clamp when the variogram cannot be fitted.
pub fn theta_or_default(fit: Result<f64>, what: &str) -> f64 {
    match fit {
        Ok(t) => t,
        Err(e) => {
            log::warn!("{what}: {e}; using range {THETA_MIN}");
            THETA_MIN
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SpdFactor;
    use crate::sampler::{standard_normal_vec, RngStream};
    use crate::spatial::exponential_correlation;

    fn grid(n: usize) -> Vec<[f64; 2]> {
        (0..n * n).map(|i| [(i / n) as f64, (i % n) as f64]).collect()
    }

    #[test]
    fn independent_noise_gives_short_range() {
        let pts = grid(20);
        let mut short = 0;
        for s in 0..20 {
            let v = standard_normal_vec(400, &mut RngStream::new(s, 0).rng());
            short += usize::from(variogram_fit(&v, &pts).unwrap() < 1.0);
        }
        assert!(short >= 18, "{short}");
    }

    #[test]
    fn recovers_exponential_range() {
        let pts = grid(20);
        let k = exponential_correlation(&pts, 3.0).unwrap();
        let f = SpdFactor::new(k.as_ref(), "test").unwrap();
        let mut inside = 0;
        for s in 0..10 {
            let v = f.mul_lower(&standard_normal_vec(400, &mut RngStream::new(100 + s, 0).rng()));
            let t = variogram_fit(&v, &pts).unwrap();
            inside += usize::from((1.5..=6.0).contains(&t));
        }
        assert!(inside >= 6, "{inside}");
    }

    #[test]
    fn constant_covariate_is_degenerate() {
        let pts = grid(5);
        assert!(matches!(variogram_fit(&[2.0; 25], &pts), Err(Error::DegenerateVariogram)));
        assert_eq!(theta_or_default(variogram_fit(&[2.0; 25], &pts), "x"), THETA_MIN);
        assert!(variogram_fit(&[1.0; 10], &pts[..10]).is_err());
    }
}
