use std::f64::consts::PI;

use faer::{Mat, MatRef};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::window::CovariateField;
use crate::classify::{ClassifierKind, DecisionScore};
use crate::error::{Error, Result};
use crate::linalg::{mat_from_rows, mat_to_rows, SpdFactor};
use crate::model::Dataset;
use crate::sampler::{geweke_default, inverse_wishart_sample, rw_metropolis_step, standard_normal_vec, MetropolisState, RngStream};
use crate::spatial::exponential_correlation;

pub const PRESS_THETA_MAX: f64 = 20.0;

/// Offsets of the four directional blocks: 3 wide, 3 deep, focal cell excluded.
pub const PRESS_DIRECTIONS: [(&str, [(i64, i64); 8]); 4] = [
    ("north", block(-2, 0, -1, 1)),
    ("south", block(0, 2, -1, 1)),
    ("east", block(-1, 1, 0, 2)),
    ("west", block(-1, 1, -2, 0)),
];

const fn block(r0: i64, r1: i64, c0: i64, c1: i64) -> [(i64, i64); 8] {
    let mut out = [(0, 0); 8];
    let mut k = 0;
    let mut r = r0;
    while r <= r1 {
        let mut c = c0;
        while c <= c1 {
            if r != 0 || c != 0 {
                out[k] = (r, c);
                k += 1;
            }
            c += 1;
        }
        r += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressConfig {
    pub iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub theta_proposal_sd: f64,
    pub mu_prior_var: f64,
    pub iw_df: f64,
    pub rng: RngStream,
}

impl Default for PressConfig {
    fn default() -> Self {
        Self {
            iters: 2000,
            burn_in: 1000,
            thin: 2,
            theta_proposal_sd: 0.5,
            mu_prior_var: 1e4,
            iw_df: 5.0,
            rng: RngStream::new(0, 0),
        }
    }
}

impl PressConfig {
    pub fn new(iters: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            iters,
            burn_in,
            rng: RngStream::new(seed, 0),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iters <= self.burn_in || self.thin == 0 {
            return Err(Error::InvalidInput(format!(
                "need iters > burn_in and thin > 0 (iters {}, burn_in {}, thin {})",
                self.iters, self.burn_in, self.thin
            )));
        }
        Ok(())
    }
}

/// One retained posterior draw for a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressDraw {
    pub mu: Vec<f64>,
    pub theta: f64,
    pub lambda: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressChain {
    pub draws: Vec<PressDraw>,
    pub theta_acceptance: f64,
    pub geweke_flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressModel {
    pub prior: [f64; 2],
    pub chains: [PressChain; 2],
    /// Zero-neighbour labels of every location.
    pub preclass: Vec<u8>,
}

/// `log N(vec(X) | 1 (x) mu, K (x) Lambda)` with rows of `x` as locations.
pub fn kronecker_log_density(x: &[Vec<f64>], mu: &[f64], k: &SpdFactor, lambda: &SpdFactor) -> f64 {
    let m = x.len();
    let l = mu.len();
    let r = Mat::from_fn(m, l, |i, a| x[i][a] - mu[a]);
    let cross = r.transpose() * k.solve(r.as_ref());
    let q = lambda.solve(cross.as_ref());
    let tr: f64 = (0..l).map(|a| q[(a, a)]).sum();
    -0.5 * ((m * l) as f64 * (2.0 * PI).ln() + l as f64 * k.log_det() + m as f64 * lambda.log_det() + tr)
}

/// Same density through the full `ml x ml` covariance.
pub fn kronecker_log_density_dense(x: &[Vec<f64>], mu: &[f64], k: MatRef<'_, f64>, lambda: MatRef<'_, f64>) -> Result<f64> {
    let m = x.len();
    let l = mu.len();
    let big = Mat::from_fn(m * l, m * l, |p, q| k[(p / l, q / l)] * lambda[(p % l, q % l)]);
    let f = SpdFactor::new(big.as_ref(), "Kronecker covariance")?;
    let r: Vec<f64> = (0..m * l).map(|p| x[p / l][p % l] - mu[p % l]).collect();
    Ok(-0.5 * ((m * l) as f64 * (2.0 * PI).ln() + f.log_det() + f.quad_form(&r)))
}

fn correlation(points: &[[f64; 2]], theta: f64) -> Result<SpdFactor> {
    SpdFactor::new(exponential_correlation(points, theta)?.as_ref(), "Press correlation")
}

/// Posterior draws of `(mu, theta, Lambda)` for one class.
pub fn press_fit_class(x: &[Vec<f64>], points: &[[f64; 2]], cfg: &PressConfig, stream: RngStream) -> Result<PressChain> {
    cfg.validate()?;
    let m = x.len();
    if m < 2 || points.len() != m {
        return Err(Error::InvalidInput(format!("Press class needs at least two located rows, got {m}")));
    }
    let l = x[0].len();
    let mut rng = stream.rng();
    let xm = mat_from_rows(x);
    let ones = vec![1.0; m];
    let mut theta = 1.0;
    let mut kf = correlation(points, theta)?;
    let mut mu: Vec<f64>;
    let mut lambda = Mat::<f64>::identity(l, l);
    let mut state = MetropolisState::new(theta, cfg.theta_proposal_sd);
    let mut draws = Vec::new();
    let resid = |mu: &[f64]| Mat::from_fn(m, l, |i, a| xm[(i, a)] - mu[a]);
    for t in 0..cfg.iters {
        let lf = SpdFactor::new(lambda.as_ref(), "Press Lambda")?;
        let lam_inv = lf.inverse();
        let kinv1 = kf.solve_vec(&ones);
        let s: f64 = kinv1.iter().sum();
        let b: Vec<f64> = (0..l).map(|a| (0..m).map(|i| xm[(i, a)] * kinv1[i]).sum()).collect();
        let prec = Mat::from_fn(l, l, |a, c| s * lam_inv[(a, c)] + if a == c { 1.0 / cfg.mu_prior_var } else { 0.0 });
        let pf = SpdFactor::new(prec.as_ref(), "Press mean precision")?;
        let rhs: Vec<f64> = (0..l).map(|a| (0..l).map(|c| lam_inv[(a, c)] * b[c]).sum()).collect();
        let mean = pf.solve_vec(&rhs);
        let noise = pf.unwhiten_precision(&standard_normal_vec(l, &mut rng));
        mu = mean.iter().zip(noise).map(|(a, e)| a + e).collect();

        let r = resid(&mu);
        let cross = r.transpose() * kf.solve(r.as_ref());
        let scale = Mat::from_fn(l, l, |a, c| cross[(a, c)] + if a == c { 1.0 } else { 0.0 });
        lambda = inverse_wishart_sample(cfg.iw_df + m as f64, scale.as_ref(), &mut rng)?;

        let lf = SpdFactor::new(lambda.as_ref(), "Press Lambda")?;
        let target = |k: &SpdFactor| {
            let c = r.transpose() * k.solve(r.as_ref());
            let q = lf.solve(c.as_ref());
            -0.5 * l as f64 * k.log_det() - 0.5 * (0..l).map(|a| q[(a, a)]).sum::<f64>()
        };
        let current = target(&kf);
        let mut proposed = None;
        let (accepted, _) = rw_metropolis_step(
            &mut state,
            current,
            |th| match correlation(points, th) {
                Ok(f) => {
                    let v = target(&f);
                    proposed = Some(f);
                    v
                }
                Err(_) => f64::NEG_INFINITY,
            },
            0.0,
            PRESS_THETA_MAX,
            &mut rng,
        );
        if accepted {
            theta = state.current;
            kf = proposed.expect("accepted proposal was factored");
        }
        if t >= cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0 {
            draws.push(PressDraw {
                mu: mu.clone(),
                theta,
                lambda: mat_to_rows(lambda.as_ref()),
            });
        }
    }
    let mut flagged = false;
    let mut chains: Vec<Vec<f64>> = vec![draws.iter().map(|d| d.theta).collect()];
    chains.extend((0..l).map(|a| draws.iter().map(|d| d.mu[a]).collect()));
    for c in &chains {
        if let Ok(z) = geweke_default(c) {
            flagged |= z.abs() > 4.0;
        }
    }
    if flagged {
        log::warn!("Press chain failed the Geweke check");
    }
    Ok(PressChain {
        draws,
        theta_acceptance: state.acceptance_rate(),
        geweke_flagged: flagged,
    })
}

/// Lambda factors of every retained draw.
fn lambda_factors(chain: &PressChain) -> Result<Vec<SpdFactor>> {
    chain
        .draws
        .iter()
        .map(|d| SpdFactor::new(mat_from_rows(&d.lambda).as_ref(), "Press Lambda draw"))
        .collect()
}

fn normal_log_density(x: &[f64], mu: &[f64], lf: &SpdFactor) -> f64 {
    let r: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
    -0.5 * (x.len() as f64 * (2.0 * PI).ln() + lf.log_det() + lf.quad_form(&r))
}

fn preclassify_with(model: &PressModel, factors: &[Vec<SpdFactor>; 2], x0: &[f64]) -> u8 {
    let t = model.chains[0].draws.len().min(model.chains[1].draws.len());
    let ones = (0..t)
        .filter(|&k| {
            let p0 = normal_log_density(x0, &model.chains[0].draws[k].mu, &factors[0][k]);
            let p1 = normal_log_density(x0, &model.chains[1].draws[k].mu, &factors[1][k]);
            p1 > p0
        })
        .count();
    u8::from(2 * ones > t)
}

/// Zero-neighbour label by majority over draws.
pub fn press_preclassify(model: &PressModel, x0: &[f64]) -> Result<u8> {
    let f = [lambda_factors(&model.chains[0])?, lambda_factors(&model.chains[1])?];
    Ok(preclassify_with(model, &f, x0))
}

pub fn press_fit(data: &Dataset, cfg: &PressConfig) -> Result<PressModel> {
    cfg.validate()?;
    let field = CovariateField::from_dataset(data)?;
    let train = data.train_indices();
    let part = |class: u8| -> Result<(Vec<Vec<f64>>, Vec<[f64; 2]>)> {
        let idx: Vec<usize> = train.iter().copied().filter(|&i| data.y[i] == Some(class)).collect();
        if idx.len() < 2 {
            return Err(Error::DegenerateResponse(train.len(), 1 - class));
        }
        Ok((
            idx.iter().map(|&i| field.rows[i].clone()).collect(),
            idx.iter().map(|&i| field.point(i)).collect(),
        ))
    };
    let (x0, p0) = part(0)?;
    let (x1, p1) = part(1)?;
    let n = (x0.len() + x1.len()) as f64;
    let prior = [x0.len() as f64 / n, x1.len() as f64 / n];
    let (c0, c1) = rayon::join(
        || press_fit_class(&x0, &p0, cfg, cfg.rng.child(0)),
        || press_fit_class(&x1, &p1, cfg, cfg.rng.child(1)),
    );
    let mut model = PressModel {
        prior,
        chains: [c0?, c1?],
        preclass: Vec::new(),
    };
    let f = [lambda_factors(&model.chains[0])?, lambda_factors(&model.chains[1])?];
    model.preclass = field.rows.iter().map(|r| preclassify_with(&model, &f, r)).collect();
    Ok(model)
}

/// `log(Delta_1 / Delta_0)` for one parameter draw per class and the class-specific windows.
pub fn press_log_delta(
    prior: [f64; 2],
    draws: [&PressDraw; 2],
    windows: [(&[Vec<f64>], &[[f64; 2]]); 2],
) -> Result<f64> {
    let mut d = [0.0; 2];
    for j in 0..2 {
        let (x, pts) = windows[j];
        let kf = correlation(pts, draws[j].theta)?;
        let lf = SpdFactor::new(mat_from_rows(&draws[j].lambda).as_ref(), "Press Lambda draw")?;
        d[j] = prior[j].ln() + kronecker_log_density(x, &draws[j].mu, &kf, &lf);
    }
    Ok(d[1] - d[0])
}

/// Sites of the directional block with the most members preclassified to `class`, ties broken at random.
pub fn directional_neighborhood<R: Rng + ?Sized>(
    field: &CovariateField,
    preclass: &[u8],
    site: usize,
    class: u8,
    rng: &mut R,
) -> Vec<usize> {
    let (r, c) = field.coords[site];
    let members: Vec<Vec<usize>> = PRESS_DIRECTIONS
        .iter()
        .map(|(_, offs)| {
            offs.iter()
                .filter_map(|&(dr, dc)| field.site_at(r as i64 + dr, c as i64 + dc))
                .filter(|&j| preclass[j] == class)
                .collect()
        })
        .collect();
    let best = members.iter().map(Vec::len).max().unwrap_or(0);
    let ties: Vec<&Vec<usize>> = members.iter().filter(|m| m.len() == best).collect();
    ties.choose(rng).map(|m| (*m).clone()).unwrap_or_default()
}

/// Posterior predictive vote over draws.
pub fn press_classify<R: Rng + ?Sized>(model: &PressModel, field: &CovariateField, site: usize, rng: &mut R) -> Result<DecisionScore> {
    if model.preclass.len() != field.rows.len() {
        return Err(Error::LengthMismatch(model.preclass.len(), field.rows.len()));
    }
    let mut windows: Vec<(Vec<Vec<f64>>, Vec<[f64; 2]>)> = Vec::with_capacity(2);
    for class in 0..2u8 {
        let nb = directional_neighborhood(field, &model.preclass, site, class, rng);
        let sites: Vec<usize> = std::iter::once(site).chain(nb).collect();
        windows.push((
            sites.iter().map(|&i| field.rows[i].clone()).collect(),
            sites.iter().map(|&i| field.point(i)).collect(),
        ));
    }
    let t = model.chains[0].draws.len().min(model.chains[1].draws.len());
    if t == 0 {
        return Err(Error::EmptyChain);
    }
    let mut ones = 0usize;
    for k in 0..t {
        let ld = press_log_delta(
            model.prior,
            [&model.chains[0].draws[k], &model.chains[1].draws[k]],
            [(&windows[0].0, &windows[0].1), (&windows[1].0, &windows[1].1)],
        )?;
        ones += usize::from(ld > 0.0);
    }
    Ok(DecisionScore::from_probability(ones as f64 / t as f64, ClassifierKind::Press))
}
