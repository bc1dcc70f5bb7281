use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{mat_from_rows, SpdFactor};
use crate::spatial::exponential_correlation;

/// Factor of `K(theta)` on `points`; `None` stands for the identity.
pub(crate) fn correlation_factor(points: &[[f64; 2]], theta: Option<f64>) -> Result<Option<SpdFactor>> {
    match theta {
        None => Ok(None),
        Some(t) => {
            let k = exponential_correlation(points, t)?;
            Ok(Some(SpdFactor::new(k.as_ref(), "spatial correlation")?))
        }
    }
}

/// `K^{-1} M`.
pub(crate) fn kinv(factor: Option<&SpdFactor>, m: &Mat<f64>) -> Mat<f64> {
    match factor {
        None => m.clone(),
        Some(f) => f.solve(m.as_ref()),
    }
}

/// `(U'K^{-1}U)^{-1} U'K^{-1}X` and the residual cross product `R'K^{-1}R`.
pub(crate) fn gls(u: &Mat<f64>, x: &[Vec<f64>], factor: Option<&SpdFactor>) -> Result<(Mat<f64>, Mat<f64>)> {
    if u.nrows() != x.len() {
        return Err(Error::LengthMismatch(u.nrows(), x.len()));
    }
    let xm = mat_from_rows(x);
    let kiu = kinv(factor, u);
    let utku = u.transpose() * &kiu;
    let g = SpdFactor::new(utku.as_ref(), "U'K^-1 U").map_err(|_| Error::Singular("U'K^-1 U".into()))?;
    let b = g.solve((kiu.transpose() * &xm).as_ref());
    let r = &xm - u * &b;
    let s = r.transpose() * kinv(factor, &r);
    Ok((b, s))
}
