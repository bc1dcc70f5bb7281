use crate::error::{Error, Result};

/// Geweke z-score comparing the first `first_frac` and last `last_frac` of a chain.
pub fn geweke_z(chain: &[f64], first_frac: f64, last_frac: f64) -> Result<f64> {
    let n = chain.len();
    if n < 100 {
        return Err(Error::InvalidInput(format!("Geweke diagnostic needs at least 100 draws, got {n}")));
    }
    if !(first_frac > 0.0 && last_frac > 0.0 && first_frac + last_frac <= 1.0) {
        return Err(Error::InvalidInput(format!("invalid Geweke fractions {first_frac}, {last_frac}")));
    }
    let n_a = ((n as f64) * first_frac).floor() as usize;
    let n_b = ((n as f64) * last_frac).floor() as usize;
    let a = &chain[..n_a];
    let b = &chain[n - n_b..];
    let (mean_a, var_a) = mean_and_spectral_variance(a)?;
    let (mean_b, var_b) = mean_and_spectral_variance(b)?;
    Ok((mean_a - mean_b) / (var_a / n_a as f64 + var_b / n_b as f64).sqrt())
}

pub fn geweke_default(chain: &[f64]) -> Result<f64> {
    geweke_z(chain, 0.1, 0.5)
}

/// Mean and spectral density at frequency zero with a Bartlett window of `floor(sqrt(n))` lags.
pub fn mean_and_spectral_variance(x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let autocov = |lag: usize| -> f64 {
        (0..n - lag).map(|i| (x[i] - mean) * (x[i + lag] - mean)).sum::<f64>() / n as f64
    };
    let gamma0 = autocov(0);
    if !(gamma0 > 1e-300) {
        return Err(Error::DegenerateChain);
    }
    let window = (n as f64).sqrt().floor() as usize;
    let mut s = gamma0;
    for lag in 1..=window.min(n - 1) {
        s += 2.0 * (1.0 - lag as f64 / (window as f64 + 1.0)) * autocov(lag);
    }
    Ok((mean, s.max(1e-300)))
}
