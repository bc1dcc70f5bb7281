use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::normal::{norm_cdf, norm_quantile, norm_sf};
use crate::error::{Error, Result};

/// Standardised bound beyond which the one-sided exponential rejection sampler is used.
const TAIL_SWITCH: f64 = 4.0;

/// Draws from `N(mu, sigma2)` truncated to the open interval `(lower, upper)`.
pub fn truncated_normal_sample<R: Rng + ?Sized>(mu: f64, sigma2: f64, lower: f64, upper: f64, rng: &mut R) -> Result<f64> {
    if lower.is_nan() || upper.is_nan() || lower >= upper {
        return Err(Error::InvalidBounds { lower, upper });
    }
    if !(sigma2 > 0.0 && sigma2.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidInput(format!("truncated normal needs finite mu and sigma2 > 0, got ({mu}, {sigma2})")));
    }
    let sd = sigma2.sqrt();
    let a = (lower - mu) / sd;
    let b = (upper - mu) / sd;
    let z = standard_truncated(a, b, rng);
    let x = mu + sd * z;
    Ok(clamp_open(x, lower, upper))
}

fn clamp_open(x: f64, lower: f64, upper: f64) -> f64 {
    if x <= lower {
        let up = lower.next_up();
        if up < upper {
            up
        } else {
            0.5 * (lower + upper)
        }
    } else if x >= upper {
        let down = upper.next_down();
        if down > lower {
            down
        } else {
            0.5 * (lower + upper)
        }
    } else {
        x
    }
}

fn standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::INFINITY {
        return StandardNormal.sample(rng);
    }
    if a >= TAIL_SWITCH {
        return upper_tail(a, b, rng);
    }
    if b <= -TAIL_SWITCH {
        return -upper_tail(-b, -a, rng);
    }
    let u: f64 = rng.random();
    if a > 0.0 {
        // Work with upper tails so that mass near 1 keeps its precision.
        let qa = norm_sf(a);
        let qb = norm_sf(b);
        -norm_quantile(qa - u * (qa - qb))
    } else {
        let pa = norm_cdf(a);
        let pb = norm_cdf(b);
        norm_quantile(pa + u * (pb - pa))
    }
}

/// Standard normal restricted to `(a, b)` with `a` far in the upper tail.
fn upper_tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if b - a <= 1.0 / a {
        // Narrow window: uniform proposal with acceptance exp((a^2 - z^2) / 2).
        loop {
            let z = a + (b - a) * rng.random::<f64>();
            let u: f64 = rng.random();
            if u.ln() <= 0.5 * (a * a - z * z) {
                return z;
            }
        }
    }
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = a + e / alpha;
        if z >= b {
            continue;
        }
        let u: f64 = rng.random();
        if u.ln() <= -0.5 * (z - alpha).powi(2) {
            return z;
        }
    }
}
