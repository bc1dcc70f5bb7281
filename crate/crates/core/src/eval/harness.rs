use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::kfold_cv_tune;
use super::errors::{posterior_predictive_labels, test_error, training_errors};
use super::report::ErrorReport;
use crate::classify::{
    classify, fit_discriminant, fit_glm_mle, knn_c, knn_g, svm_decision, svm_fit, ClassifierKind, DaKind,
    DecisionScore, FittedClassifier, Kernel, KnnModel, Link, Scaler, SvmConfig, TieBreak,
};
use crate::error::{Error, Result};
use crate::linalg::select_rows;
use crate::model::{fit_indep_probit, fit_lowrank, fit_sglm, fit_sglmm, Dataset, Fit, KappaMode, McmcConfig, PriorSpec};
use crate::sampler::RngStream;
use crate::spatial_alt::{mardia_fit, press_fit, spatial_lda_fit, switzer_fit, PressConfig, UBasis};

pub const KNN_GRID: [usize; 8] = [1, 3, 5, 7, 9, 11, 15, 21];
pub const SVM_LAMBDA_GRID: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
pub const SVM_U_GRID: [f64; 3] = [0.01, 0.1, 1.0];

/// Settings shared by every classifier in an evaluation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub classifiers: Vec<ClassifierKind>,
    pub mcmc: McmcConfig,
    pub priors: PriorSpec,
    pub press: PressConfig,
    pub lowrank_frac: f64,
    pub cv_folds: usize,
    pub stream: RngStream,
}

impl HarnessConfig {
    pub fn new(classifiers: Vec<ClassifierKind>, mcmc: McmcConfig, seed: u64) -> Self {
        let press = PressConfig {
            iters: mcmc.iters.min(4000),
            burn_in: mcmc.burn_in.min(2000).min(mcmc.iters.min(4000) / 2),
            ..PressConfig::default()
        };
        Self {
            classifiers,
            mcmc,
            priors: PriorSpec::default(),
            press,
            lowrank_frac: 0.1,
            cv_folds: 5,
            stream: RngStream::new(seed, 0),
        }
    }
}

/// Report and per-site labels of one classifier.
#[derive(Debug, Clone)]
pub struct ClassifierRun {
    pub report: ErrorReport,
    /// Predicted label per location; `None` where the classifier produced none.
    pub labels: Vec<Option<u8>>,
}

fn label(score: &DecisionScore) -> Result<u8> {
    classify(score, TieBreak::Zero)
}

fn known(data: &Dataset, sites: &[usize], labels: &[u8]) -> Result<Option<f64>> {
    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    for (&i, &l) in sites.iter().zip(labels) {
        if let Some(y) = data.y[i] {
            pred.push(l);
            truth.push(y);
        }
    }
    if truth.is_empty() {
        Ok(None)
    } else {
        test_error(&pred, &truth).map(Some)
    }
}

/// Plug-in decisions at every training and test location.
fn plug_in(model: &FittedClassifier, data: &Dataset, stream: RngStream) -> Result<ClassifierRun> {
    let train = data.train_indices();
    let test = data.test_indices();
    let sites: Vec<usize> = train.iter().chain(&test).copied().collect();
    let scores = model.decisions(data, &sites, stream)?;
    let mut labels = vec![None; data.n()];
    for (&i, s) in sites.iter().zip(&scores) {
        labels[i] = Some(label(s)?);
    }
    let pick = |s: &[usize]| s.iter().map(|&i| labels[i].expect("scored")).collect::<Vec<u8>>();
    let mut report = ErrorReport::new(model.kind(), train.len(), test.len());
    report.training_error = known(data, &train, &pick(&train))?;
    report.test_error = known(data, &test, &pick(&test))?;
    Ok(ClassifierRun { report, labels })
}

fn covariate_rows(data: &Dataset) -> Result<Vec<Vec<f64>>> {
    if data.covariate_columns().is_empty() {
        return Err(Error::InvalidInput("classifier needs at least one non-intercept covariate".into()));
    }
    Ok((0..data.n()).map(|i| data.covariate_row(i)).collect())
}

/// Posterior-predictive run of a latent-variable fit.
pub fn latent_run(kind: ClassifierKind, data: &Dataset, fit: &Fit, stream: RngStream) -> Result<ClassifierRun> {
    let train = fit.artifacts.train().to_vec();
    let test = fit.artifacts.test().to_vec();
    let (oaat, joint) = training_errors(fit, &mut stream.rng())?;
    let (_, test_labels) = posterior_predictive_labels(fit)?;
    let mut labels = vec![None; data.n()];
    for (&i, &l) in train.iter().zip(&oaat.labels) {
        labels[i] = Some(l);
    }
    for (&i, &l) in test.iter().zip(&test_labels) {
        labels[i] = Some(l);
    }
    let mut report = ErrorReport::new(kind, train.len(), data.test_indices().len());
    report.training_error_oaat = Some(oaat.rate);
    report.training_error_joint = Some(joint.rate);
    let held: Vec<(usize, u8)> = test
        .iter()
        .zip(&test_labels)
        .filter(|(i, _)| data.test_mask[**i])
        .map(|(&i, &l)| (i, l))
        .collect();
    let sites: Vec<usize> = held.iter().map(|h| h.0).collect();
    let ls: Vec<u8> = held.iter().map(|h| h.1).collect();
    report.test_error = known(data, &sites, &ls)?;
    report.geweke_flagged = Some(fit.samples.meta.geweke_flagged);
    Ok(ClassifierRun { report, labels })
}

/// Fits the latent-variable model behind `kind`.
pub fn fit_latent(kind: ClassifierKind, data: &Dataset, cfg: &HarnessConfig, stream: RngStream) -> Result<Fit> {
    let mcmc = cfg.mcmc.clone().with_stream(stream);
    match kind {
        ClassifierKind::BayesProbit => fit_indep_probit(data, &cfg.priors, &mcmc),
        ClassifierKind::Sglm => fit_sglm(data, &cfg.priors, &mcmc),
        ClassifierKind::Sglmm => fit_sglmm(data, &cfg.priors, &mcmc, KappaMode::Sampled),
        ClassifierKind::LowRank => fit_lowrank(data, &cfg.priors, cfg.lowrank_frac, &mcmc),
        other => Err(Error::InvalidInput(format!("{other} is not a latent-variable model"))),
    }
}

/// A fitted plug-in classifier and a short description of any tuning.
#[derive(Debug, Clone)]
pub struct PlugInFit {
    pub model: FittedClassifier,
    pub note: Option<String>,
}

fn fit_svm(kind: ClassifierKind, rows: &[Vec<f64>], y: &[u8], cfg: &HarnessConfig, stream: RngStream) -> Result<PlugInFit> {
    let make = |p: &(f64, f64)| -> SvmConfig {
        let kernel = match kind {
            ClassifierKind::SvmLinear => Kernel::Linear,
            ClassifierKind::SvmCubic => Kernel::Poly { degree: 3 },
            _ => Kernel::Radial { u: p.1 },
        };
        SvmConfig::new(kernel, p.0)
    };
    let grid: Vec<(f64, f64)> = if kind == ClassifierKind::SvmRadial {
        SVM_LAMBDA_GRID.iter().flat_map(|&l| SVM_U_GRID.iter().map(move |&u| (l, u))).collect()
    } else {
        SVM_LAMBDA_GRID.iter().map(|&l| (l, 0.0)).collect()
    };
    let cv = kfold_cv_tune(&grid, y, cfg.cv_folds, stream, |p, tr, va, _| {
        let xs: Vec<Vec<f64>> = tr.iter().map(|&i| rows[i].clone()).collect();
        let ys: Vec<u8> = tr.iter().map(|&i| y[i]).collect();
        let m = svm_fit(&ys, &xs, &make(p))?;
        va.iter().map(|&i| label(&svm_decision(&m, &rows[i]))).collect()
    })?;
    Ok(PlugInFit {
        model: FittedClassifier::Svm(svm_fit(y, rows, &make(&cv.best))?),
        note: Some(format!("lambda={} u={} cve={:.4}", cv.best.0, cv.best.1, cv.cve)),
    })
}

fn fit_knn(geographic: bool, rows: Vec<Vec<f64>>, y: &[u8], cfg: &HarnessConfig, stream: RngStream) -> Result<PlugInFit> {
    let (scaler, train) = if geographic {
        (None, rows)
    } else {
        let s = Scaler::fit(&rows);
        let t = s.transform_all(&rows);
        (Some(s), t)
    };
    let score = |x0: &[f64], tr: &[Vec<f64>], ys: &[u8], k: usize| {
        if geographic {
            let sites: Vec<[f64; 2]> = tr.iter().map(|r| [r[0], r[1]]).collect();
            knn_g([x0[0], x0[1]], &sites, ys, k)
        } else {
            knn_c(x0, tr, ys, k)
        }
    };
    let grid: Vec<usize> = KNN_GRID.iter().copied().filter(|&k| k < train.len()).collect();
    let cv = kfold_cv_tune(&grid, y, cfg.cv_folds, stream, |&k, tr, va, _| {
        let xs: Vec<Vec<f64>> = tr.iter().map(|&i| train[i].clone()).collect();
        let ys: Vec<u8> = tr.iter().map(|&i| y[i]).collect();
        if k > xs.len() {
            return Err(Error::InvalidInput(format!("k = {k} exceeds the fold size")));
        }
        va.iter().map(|&i| label(&score(&train[i], &xs, &ys, k)?)).collect()
    })?;
    Ok(PlugInFit {
        note: Some(format!("k={} cve={:.4}", cv.best, cv.cve)),
        model: FittedClassifier::Knn(KnnModel {
            geographic,
            k: cv.best,
            scaler,
            train,
            y: y.to_vec(),
        }),
    })
}

/// Fits a non-latent classifier on the training part of `data`, tuning by cross-validation where needed.
pub fn fit_plug_in(kind: ClassifierKind, data: &Dataset, cfg: &HarnessConfig, stream: RngStream) -> Result<PlugInFit> {
    data.check_training_response()?;
    let train = data.train_indices();
    let y = data.responses(&train)?;
    let plain = |model| Ok(PlugInFit { model, note: None });
    match kind {
        ClassifierKind::GlmLogit | ClassifierKind::GlmProbit => {
            let link = if kind == ClassifierKind::GlmLogit { Link::Logit } else { Link::Probit };
            plain(FittedClassifier::Glm(fit_glm_mle(&y, select_rows(data.x.as_ref(), &train).as_ref(), link)?))
        }
        ClassifierKind::Lda | ClassifierKind::Dlda | ClassifierKind::Qda => {
            let rows = covariate_rows(data)?;
            let da = match kind {
                ClassifierKind::Lda => DaKind::Lda,
                ClassifierKind::Dlda => DaKind::Dlda,
                _ => DaKind::Qda,
            };
            let xs: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
            plain(FittedClassifier::Discriminant(fit_discriminant(da, &y, &xs)?))
        }
        ClassifierKind::SvmLinear | ClassifierKind::SvmCubic | ClassifierKind::SvmRadial => {
            let rows = covariate_rows(data)?;
            let xs: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
            fit_svm(kind, &xs, &y, cfg, stream)
        }
        ClassifierKind::KnnC => {
            let rows = covariate_rows(data)?;
            fit_knn(false, train.iter().map(|&i| rows[i].clone()).collect(), &y, cfg, stream)
        }
        ClassifierKind::KnnG => {
            let pts = data.points();
            fit_knn(true, train.iter().map(|&i| pts[i].to_vec()).collect(), &y, cfg, stream)
        }
        ClassifierKind::Switzer => {
            covariate_rows(data)?;
            plain(FittedClassifier::Switzer(switzer_fit(data)?))
        }
        ClassifierKind::Mardia => {
            covariate_rows(data)?;
            plain(FittedClassifier::Mardia(mardia_fit(data, false)?))
        }
        ClassifierKind::SpatialLda => {
            covariate_rows(data)?;
            let (rows, cols) = data.extent();
            plain(FittedClassifier::SpatialLda(spatial_lda_fit(data, UBasis::Coordinates { rows, cols })?))
        }
        ClassifierKind::Press => {
            covariate_rows(data)?;
            let pc = PressConfig { rng: stream, ..cfg.press };
            let model = press_fit(data, &pc)?;
            let flagged = model.chains.iter().any(|c| c.geweke_flagged);
            Ok(PlugInFit {
                model: FittedClassifier::Press(model),
                note: flagged.then(|| "Geweke check failed".to_string()),
            })
        }
        other => Err(Error::InvalidInput(format!("{other} is a latent-variable model"))),
    }
}

fn run_inner(kind: ClassifierKind, data: &Dataset, cfg: &HarnessConfig, stream: RngStream) -> Result<ClassifierRun> {
    data.check_training_response()?;
    if kind.is_latent_model() {
        let fit = fit_latent(kind, data, cfg, stream.child(0))?;
        return latent_run(kind, data, &fit, stream.child(1));
    }
    let fit = fit_plug_in(kind, data, cfg, stream.child(0))?;
    let mut run = plug_in(&fit.model, data, stream.child(1))?;
    run.report.note = fit.note;
    if let FittedClassifier::Press(m) = &fit.model {
        run.report.geweke_flagged = Some(m.chains.iter().any(|c| c.geweke_flagged));
    }
    Ok(run)
}

/// Fits and scores one classifier; failures become a report with a note and no rates.
pub fn run_classifier(kind: ClassifierKind, data: &Dataset, cfg: &HarnessConfig) -> ClassifierRun {
    let stream = cfg.stream.child(kind as u64 + 1);
    let start = Instant::now();
    let mut run = match run_inner(kind, data, cfg, stream) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("{kind}: {e}");
            let mut report = ErrorReport::new(kind, data.train_indices().len(), data.test_indices().len());
            report.note = Some(format!("failed: {e}"));
            ClassifierRun {
                report,
                labels: vec![None; data.n()],
            }
        }
    };
    run.report.wall_time_secs = start.elapsed().as_secs_f64();
    run
}

/// Runs every configured classifier in parallel, in configuration order.
pub fn evaluate_classifiers(data: &Dataset, cfg: &HarnessConfig) -> Vec<ClassifierRun> {
    cfg.classifiers.par_iter().map(|&k| run_classifier(k, data, cfg)).collect()
}
