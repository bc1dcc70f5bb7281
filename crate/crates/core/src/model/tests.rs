use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::*;
use crate::eval::{
    joint_training_error, one_at_a_time_training_error, simulate_dataset, LinearComponent, Scenario,
};
use crate::linalg::{dot, select_square, mat_vec};
use crate::sampler::RngStream;
use crate::spatial::{conditional_normal, CarSpectrum, NeighborOrder};

fn simulated(component: LinearComponent, kappa: f64, rows: usize, cols: usize, seed: u64, test_every: usize) -> Dataset {
    let mut sc = Scenario::new(component, kappa, seed).with_grid(rows, cols);
    // The symmetrised CAR matrix loses definiteness near rho = 1 on small grids.
    sc.rho = 0.9;
    let mut data = simulate_dataset(&sc, &mut sc.stream().rng()).unwrap().data;
    for i in 0..data.n() {
        data.test_mask[i] = test_every > 0 && i % test_every == 3;
    }
    data
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn identical_seeds_give_identical_chains() {
    let data = simulated(LinearComponent::Simple1, 0.5, 6, 6, 1, 5);
    let cfg = McmcConfig::new(400, 200, 9);
    let a = fit_sglmm(&data, &PriorSpec::default(), &cfg, KappaMode::Sampled).unwrap();
    let b = fit_sglmm(&data, &PriorSpec::default(), &cfg, KappaMode::Sampled).unwrap();
    assert_eq!(a.samples.beta, b.samples.beta);
    assert_eq!(a.samples.rho, b.samples.rho);
    assert_eq!(a.samples.kappa, b.samples.kappa);
    assert_eq!(a.samples.z_test, b.samples.z_test);
    assert_eq!(a.samples.len(), 200);
    let c = fit_sglmm(&data, &PriorSpec::default(), &McmcConfig::new(400, 200, 10), KappaMode::Sampled).unwrap();
    assert_ne!(a.samples.beta, c.samples.beta);
}

#[test]
fn sglmm_with_kappa_one_is_the_sglm() {
    let data = simulated(LinearComponent::Simple1, 1.0, 6, 6, 2, 4);
    let cfg = McmcConfig::new(300, 100, 4);
    let a = fit_sglm(&data, &PriorSpec::default(), &cfg).unwrap();
    let b = fit_sglmm(&data, &PriorSpec::default(), &cfg, KappaMode::Fixed(1.0)).unwrap();
    assert_eq!(a.samples.beta, b.samples.beta);
    assert_eq!(a.samples.rho, b.samples.rho);
    assert_eq!(a.samples.z_test, b.samples.z_test);
    assert!(a.samples.kappa.is_none());
    assert!(b.samples.kappa.as_ref().unwrap().iter().all(|&k| k == 1.0));
}

#[test]
fn lowrank_without_basis_is_independent_probit() {
    let data = simulated(LinearComponent::Simple1, 0.5, 6, 6, 3, 0);
    let cfg = McmcConfig::new(300, 100, 5);
    let a = fit_lowrank(&data, &PriorSpec::default(), 0.0, &cfg).unwrap();
    let b = fit_indep_probit(&data, &PriorSpec::default(), &cfg).unwrap();
    assert_eq!(a.samples.beta, b.samples.beta);
    assert_eq!(a.samples.gamma2, b.samples.gamma2);
    assert_eq!(a.samples.meta.lowrank_rank, Some(0));
}

#[test]
fn lowrank_adds_basis_columns() {
    let data = simulated(LinearComponent::Simple1, 1.0, 8, 8, 4, 0);
    let fit = fit_lowrank(&data, &PriorSpec::default(), 0.1, &McmcConfig::new(200, 100, 1)).unwrap();
    assert_eq!(fit.samples.p(), 2 + 7);
    assert_eq!(fit.artifacts.design.ncols(), 9);
}

#[test]
fn latents_respect_truncation_and_bounds() {
    let data = simulated(LinearComponent::Simple1, 0.5, 6, 6, 5, 6);
    let fit = fit_sglmm(&data, &PriorSpec::default(), &McmcConfig::new(300, 0, 6), KappaMode::Sampled).unwrap();
    let y = &fit.artifacts.y_train;
    for z in &fit.samples.z_train {
        for (zi, &yi) in z.iter().zip(y) {
            assert_eq!(*zi > 0.0, yi == 1);
        }
    }
    assert!(fit.samples.rho.as_ref().unwrap().iter().all(|&r| r > 0.0 && r < 1.0));
    assert!(fit.samples.kappa.as_ref().unwrap().iter().all(|&k| (0.0..=1.0).contains(&k)));
    assert!(fit.samples.gamma2.iter().all(|&g| g > 0.0));
}

#[test]
fn thinning_and_degenerate_response() {
    let mut data = simulated(LinearComponent::Intercept, 0.0, 5, 5, 7, 0);
    let fit = fit_indep_probit(&data, &PriorSpec::default(), &McmcConfig::new(100, 10, 1).with_thin(7)).unwrap();
    assert_eq!(fit.samples.len(), 13);
    assert!(fit.samples.rho.is_none());
    for v in data.y.iter_mut() {
        *v = Some(1);
    }
    assert!(matches!(
        fit_indep_probit(&data, &PriorSpec::default(), &McmcConfig::new(100, 10, 1)),
        Err(crate::Error::DegenerateResponse(25, 1))
    ));
}

#[test]
fn strong_prior_pins_coefficients() {
    let data = simulated(LinearComponent::Simple2, 0.0, 10, 10, 8, 0);
    let priors = PriorSpec {
        beta_cov: BetaCov::Isotropic(1e-6),
        ..PriorSpec::default()
    };
    let fit = fit_indep_probit(&data, &priors, &McmcConfig::new(600, 100, 2)).unwrap();
    for k in 0..2 {
        assert!(mean(&fit.samples.beta_column(k)).abs() < 0.01);
    }
}

#[test]
fn separable_data_give_a_large_slope() {
    let n = 40;
    let x = Mat::from_fn(n, 1, |i, _| (i as f64 - 19.5) / 10.0);
    let y = (0..n).map(|i| Some(u8::from(i >= 20))).collect();
    let coords = (0..n).map(|i| (i / 8, i % 8)).collect();
    let data = Dataset::with_intercept(y, &x, &["x1".into()], coords, vec![false; n]).unwrap();
    let fit = fit_indep_probit(&data, &PriorSpec::default(), &McmcConfig::new(3000, 1000, 3)).unwrap();
    assert!(mean(&fit.samples.beta_column(1)) > 2.0);
}

#[test]
fn coin_flips_center_the_intercept() {
    let mut rng = RngStream::new(77, 0).rng();
    let n = 400;
    let y = (0..n).map(|_| Some(u8::from(rng.random::<bool>()))).collect();
    let coords = (0..n).map(|i| (i / 20, i % 20)).collect();
    let data = Dataset::with_intercept(y, &Mat::zeros(n, 0), &[], coords, vec![false; n]).unwrap();
    let fit = fit_indep_probit(&data, &PriorSpec::default(), &McmcConfig::new(2000, 500, 4)).unwrap();
    assert!(mean(&fit.samples.beta_column(0)).abs() < 0.1);
}

#[test]
fn noise_does_not_suggest_strong_dependence() {
    let mut rng = RngStream::new(78, 0).rng();
    let n = 25;
    let y = (0..n).map(|i| Some(u8::from(i % 2 == 0) ^ u8::from(rng.random::<f64>() < 0.1))).collect();
    let coords = (0..n).map(|i| (i / 5, i % 5)).collect();
    let data = Dataset::with_intercept(y, &Mat::zeros(n, 0), &[], coords, vec![false; n]).unwrap();
    let fit = fit_sglm(&data, &PriorSpec::default(), &McmcConfig::new(6000, 2000, 5)).unwrap();
    let rho = mean(fit.samples.rho.as_ref().unwrap());
    assert!(rho < 0.9, "{rho}");
}

#[test]
fn moderate_spatial_data_keep_kappa_away_from_zero() {
    let data = simulated(LinearComponent::Simple1, 0.5, 12, 12, 13, 0);
    let fit = fit_sglmm(&data, &PriorSpec::default(), &McmcConfig::new(3000, 1000, 6), KappaMode::Sampled).unwrap();
    let k = fit.samples.kappa.as_ref().unwrap();
    let frac = k.iter().filter(|&&v| v > 0.1).count() as f64 / k.len() as f64;
    assert!(frac > 0.5, "{frac}");
}

#[test]
fn independent_prediction_ignores_neighbours() {
    let data = simulated(LinearComponent::Simple1, 0.0, 5, 5, 9, 4);
    let fit = fit_indep_probit(&data, &PriorSpec::default(), &McmcConfig::new(200, 100, 7)).unwrap();
    let focal = data.test_indices()[0];
    let (m, v) = latent_conditional_moments(&fit, focal).unwrap();
    for t in 0..fit.samples.len() {
        assert!((m[t] - dot(&data.design_row(focal), &fit.samples.beta[t])).abs() < 1e-12);
        assert_eq!(v[t], 1.0);
    }
    assert!(predict_latent(&fit, 10_000, &mut RngStream::new(0, 0).rng()).is_err());
}

#[test]
fn nugget_free_prediction_interpolates() {
    let data = simulated(LinearComponent::Simple1, 1.0, 5, 5, 10, 4);
    let fit = fit_sglm(&data, &PriorSpec::default(), &McmcConfig::new(60, 30, 8)).unwrap();
    let site = fit.artifacts.train()[2];
    let (m, v) = latent_conditional_moments(&fit, site).unwrap();
    for t in 0..fit.samples.len() {
        assert!(v[t] < 1e-8);
        assert!((m[t] - fit.samples.z_train[t][2]).abs() < 1e-6);
    }
}

#[test]
fn prediction_matches_gaussian_conditioning() {
    let x = Mat::from_fn(4, 1, |i, _| i as f64 * 0.3 - 0.4);
    let data = Dataset::with_intercept(
        vec![Some(0), Some(1), Some(1), Some(0)],
        &x,
        &["x1".into()],
        vec![(0, 0), (0, 1), (1, 0), (1, 1)],
        vec![false, false, false, true],
    )
    .unwrap();
    let fit = fit_sglmm(&data, &PriorSpec::default(), &McmcConfig::new(40, 20, 11), KappaMode::Fixed(0.6)).unwrap();
    let spectrum = CarSpectrum::new(&data.neighbors(NeighborOrder::Second)).unwrap();
    let t = 5;
    let (rho, kappa) = fit.theta_at(t);
    let sigma = blend(spectrum.dependence(rho).unwrap().as_ref(), kappa);
    let order = [3usize, 0, 1, 2];
    let cov = select_square(sigma.as_ref(), &order);
    let mu: Vec<f64> = order.iter().map(|&i| dot(&data.design_row(i), &fit.samples.beta[t])).collect();
    let (cm, cv) = conditional_normal(&mu, cov.as_ref(), &fit.samples.z_train[t]).unwrap();
    let (m, v) = latent_conditional_moments(&fit, 3).unwrap();
    assert!((m[t] - cm).abs() < 1e-10);
    assert!((v[t] - cv).abs() < 1e-10);

    // Monte Carlo check of the sampled draws at one iteration.
    let mut rng = RngStream::new(12, 0).rng();
    let draws: Vec<f64> = (0..20_000)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            m[t] + v[t].sqrt() * e
        })
        .collect();
    let se = (cv / draws.len() as f64).sqrt();
    assert!((mean(&draws) - cm).abs() < 3.0 * se);
    let pl = predict_latent(&fit, 3, &mut RngStream::new(13, 0).rng()).unwrap();
    assert_eq!(pl.len(), fit.samples.len());
}

#[test]
fn one_at_a_time_reduces_to_independent_predictive() {
    let data = simulated(LinearComponent::Simple1, 0.0, 6, 6, 14, 0);
    let fit = fit_indep_probit(&data, &PriorSpec::default(), &McmcConfig::new(300, 100, 3)).unwrap();
    let got = one_at_a_time_training_error(&fit, &mut RngStream::new(5, 0).rng()).unwrap();
    let mut rng = RngStream::new(5, 0).rng();
    let x = fit.artifacts.train_design();
    let mut counts = vec![0usize; x.nrows()];
    for beta in &fit.samples.beta {
        let xb = mat_vec(x.as_ref(), beta);
        for (c, m) in counts.iter_mut().zip(&xb) {
            let e: f64 = StandardNormal.sample(&mut rng);
            *c += usize::from(m + e > 0.0);
        }
    }
    for (p, c) in got.p1.iter().zip(&counts) {
        assert!((p - *c as f64 / fit.samples.len() as f64).abs() < 1e-12);
    }
}

#[test]
fn joint_error_on_symmetric_null_is_near_half() {
    let mut rng = RngStream::new(79, 0).rng();
    let n = 400;
    let mut y: Vec<Option<u8>> = (0..n).map(|i| Some(u8::from(i % 2 == 0))).collect();
    y.swap(0, 1);
    let _ = rng.random::<u8>();
    let coords = (0..n).map(|i| (i / 20, i % 20)).collect();
    let data = Dataset::with_intercept(y, &Mat::zeros(n, 0), &[], coords, vec![false; n]).unwrap();
    let fit = fit_indep_probit(&data, &PriorSpec::default(), &McmcConfig::new(1000, 200, 2)).unwrap();
    let j = joint_training_error(&fit, &mut RngStream::new(6, 0).rng()).unwrap();
    assert!((j.rate - 0.5).abs() < 0.1, "{}", j.rate);
    let again = joint_training_error(&fit, &mut RngStream::new(6, 0).rng()).unwrap();
    assert_eq!(j, again);
}

#[test]
fn chain_file_round_trip() {
    let data = simulated(LinearComponent::Simple1, 0.5, 5, 5, 15, 4);
    let fit = fit_sglmm(&data, &PriorSpec::default(), &McmcConfig::new(60, 30, 1), KappaMode::Sampled).unwrap();
    let mut buf = Vec::new();
    fit.samples.write_jsonl(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let first = text.lines().nth(1).unwrap();
    for key in ["\"beta\"", "\"rho\"", "\"kappa\"", "\"gamma2\"", "\"z_test\""] {
        assert!(first.contains(key));
    }
    let back = PosteriorSamples::read_jsonl(buf.as_slice()).unwrap();
    assert_eq!(back.beta, fit.samples.beta);
    assert_eq!(back.z_test, fit.samples.z_test);
    assert_eq!(back.kappa, fit.samples.kappa);
}
