use faer::{Mat, MatRef};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::SpdFactor;

pub fn chisq_sample<R: Rng + ?Sized>(df: f64, rng: &mut R) -> Result<f64> {
    let dist = ChiSquared::new(df).map_err(|e| Error::InvalidInput(format!("chi-square df {df}: {e}")))?;
    Ok(dist.sample(rng))
}

/// Draws `b / chi2_a`.
pub fn scaled_inv_chisq_sample<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("scaled inverse chi-square needs a, b > 0, got ({a}, {b})")));
    }
    loop {
        let c = chisq_sample(a, rng)?;
        let v = b / c;
        if v > 0.0 && v.is_finite() {
            return Ok(v);
        }
    }
}

pub fn standard_normal_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Draws `mean + L u` with `L L' = cov`.
pub fn mvn_sample<R: Rng + ?Sized>(mean: &[f64], cov: MatRef<'_, f64>, rng: &mut R) -> Result<Vec<f64>> {
    if cov.nrows() != mean.len() {
        return Err(Error::LengthMismatch(cov.nrows(), mean.len()));
    }
    let factor = SpdFactor::new(cov, "MVN covariance")?;
    Ok(mvn_from_factor(mean, &factor, rng))
}

pub fn mvn_from_factor<R: Rng + ?Sized>(mean: &[f64], factor: &SpdFactor, rng: &mut R) -> Vec<f64> {
    let u = standard_normal_vec(mean.len(), rng);
    let lu = factor.mul_lower(&u);
    mean.iter().zip(lu).map(|(m, v)| m + v).collect()
}

/// Inverse-Wishart draw with `df` degrees of freedom and scale `psi`, via the Bartlett decomposition.
pub fn inverse_wishart_sample<R: Rng + ?Sized>(df: f64, psi: MatRef<'_, f64>, rng: &mut R) -> Result<Mat<f64>> {
    let p = psi.nrows();
    if df <= (p as f64) - 1.0 {
        return Err(Error::InvalidInput(format!("inverse-Wishart df {df} too small for dimension {p}")));
    }
    let psi_inv = SpdFactor::new(psi, "inverse-Wishart scale")?.inverse();
    let l = SpdFactor::new(psi_inv.as_ref(), "inverse-Wishart scale inverse")?;
    let mut a = Mat::<f64>::zeros(p, p);
    for i in 0..p {
        a[(i, i)] = chisq_sample(df - i as f64, rng)?.sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = l.lower() * &a;
    let wishart = &la * la.transpose();
    Ok(SpdFactor::new(wishart.as_ref(), "Wishart draw")?.inverse())
}
