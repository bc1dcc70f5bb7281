use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{RunConfig, SplitKind};
use super::csvio::{prediction_row, read_dataset, write_dataset, write_predictions};
use super::svg::{classification_map, error_vs_kappa_chart};
use crate::classify::{
    classify, posterior_predictive_from_latent, ClassifierKind, FittedClassifier, SavedClassifier, TieBreak,
};
use crate::error::{Error, Result};
use crate::eval::{
    clustered_test_split, evaluate_classifiers, fit_latent, fit_plug_in, random_test_split, report_rows, test_fraction,
    write_report_csv, DatasetLabel, ErrorReport, HarnessConfig, ReportRow, Scenario,
};
use crate::model::{Dataset, McmcConfig, PosteriorSamples};
use crate::sampler::RngStream;

#[derive(Serialize)]
struct Echo<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a RunConfig,
}

fn prepare_out(cfg: &RunConfig, command: &str) -> Result<std::path::PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    write_json(
        &dir.join("config.json"),
        &Echo {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
        },
    )?;
    Ok(dir)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_data(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg.data_path()?;
    let f = File::open(path).map_err(|e| Error::InvalidInput(format!("cannot open {}: {e}", path.display())))?;
    read_dataset(BufReader::new(f))
}

fn harness(cfg: &RunConfig, classifiers: Vec<ClassifierKind>) -> Result<HarnessConfig> {
    let mut mcmc = McmcConfig::new(cfg.iters(), cfg.burn_in(), cfg.seed());
    if let Some(t) = cfg.thin {
        mcmc.thin = t;
    }
    mcmc.validate()?;
    let mut h = HarnessConfig::new(classifiers, mcmc, cfg.seed());
    if let Some(p) = &cfg.priors {
        h.priors = p.clone();
    }
    Ok(h)
}

fn scenario(cfg: &RunConfig, kappa: f64, seed: u64) -> Result<Scenario> {
    let mut sc = Scenario::new(cfg.component()?, kappa, seed).with_grid(cfg.rows.unwrap_or(20), cfg.cols.unwrap_or(20));
    if let Some(r) = cfg.rho {
        sc.rho = r;
    }
    sc.validate()?;
    Ok(sc)
}

fn simulate_split(sc: &Scenario, split: SplitKind) -> Result<Dataset> {
    let mut rng = sc.stream().rng();
    let mut data = crate::eval::simulate_dataset(sc, &mut rng)?.data;
    let mut split_rng = sc.stream().child(1).rng();
    data.test_mask = match split {
        SplitKind::Clustered => {
            let domain = data.domain().ok_or_else(|| Error::InvalidInput("clustered split needs a full grid".into()))?;
            clustered_test_split(&domain, 25.min(domain.len()), 4, &mut split_rng)?
        }
        SplitKind::Random => {
            let n = data.n();
            random_test_split(n, (0.27 * n as f64).round() as usize, &mut split_rng)?
        }
        SplitKind::None => vec![false; data.n()],
    };
    Ok(data)
}

#[derive(Serialize)]
struct ScenarioEcho<'a> {
    scenario: &'a Scenario,
    coefficients: Vec<f64>,
    split: SplitKind,
    test_fraction: f64,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let kappas = cfg.kappas();
    if kappas.len() != 1 {
        return Err(Error::InvalidInput("simulate takes a single --kappa".into()));
    }
    let sc = scenario(cfg, kappas[0], cfg.seed())?;
    let split = cfg.split.unwrap_or(SplitKind::Clustered);
    let data = simulate_split(&sc, split)?;
    let dir = prepare_out(cfg, "simulate")?;
    write_dataset(BufWriter::new(File::create(dir.join("data.csv"))?), &data)?;
    write_json(
        &dir.join("scenario.json"),
        &ScenarioEcho {
            scenario: &sc,
            coefficients: sc.component.coefficients(),
            split,
            test_fraction: test_fraction(&data.test_mask),
        },
    )?;
    log::info!("wrote {} locations to {}", data.n(), dir.display());
    Ok(())
}

#[derive(Serialize)]
struct FitReport {
    classifier: ClassifierKind,
    n_train: usize,
    n_test: usize,
    wall_time_secs: f64,
    geweke_flagged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    geweke: Option<Vec<crate::model::GewekeEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_acceptance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_acceptance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    output: String,
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<()> {
    let tag = cfg.model.as_deref().ok_or_else(|| Error::InvalidInput("--model is required".into()))?;
    let kind = ClassifierKind::from_tag(tag).ok_or_else(|| Error::InvalidInput(format!("unknown model `{tag}`")))?;
    let data = load_data(cfg)?;
    data.check_training_response()?;
    let h = harness(cfg, vec![kind])?;
    let dir = prepare_out(cfg, "fit")?;
    let start = std::time::Instant::now();
    let stream = RngStream::new(cfg.seed(), 1);
    let report = if kind.is_latent_model() {
        let fit = fit_latent(kind, &data, &h, stream)?;
        fit.samples.write_jsonl(BufWriter::new(File::create(dir.join("chains.jsonl"))?))?;
        let meta = &fit.samples.meta;
        FitReport {
            classifier: kind,
            n_train: meta.train_indices.len(),
            n_test: meta.test_indices.len(),
            wall_time_secs: start.elapsed().as_secs_f64(),
            geweke_flagged: Some(meta.geweke_flagged),
            geweke: Some(meta.geweke.clone()),
            rho_acceptance: meta.rho_acceptance,
            kappa_acceptance: meta.kappa_acceptance,
            note: None,
            output: "chains.jsonl".into(),
        }
    } else {
        let fit = fit_plug_in(kind, &data, &h, stream)?;
        let flagged = match &fit.model {
            FittedClassifier::Press(m) => Some(m.chains.iter().any(|c| c.geweke_flagged)),
            _ => None,
        };
        SavedClassifier::new(fit.model).write_json(BufWriter::new(File::create(dir.join("model.json"))?))?;
        FitReport {
            classifier: kind,
            n_train: data.train_indices().len(),
            n_test: data.test_indices().len(),
            wall_time_secs: start.elapsed().as_secs_f64(),
            geweke_flagged: flagged,
            geweke: None,
            rho_acceptance: None,
            kappa_acceptance: None,
            note: fit.note,
            output: "model.json".into(),
        }
    };
    write_json(&dir.join("fit_report.json"), &report)
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<()> {
    let path = cfg.model.as_deref().ok_or_else(|| Error::InvalidInput("--model <saved model file> is required".into()))?;
    let data = load_data(cfg)?;
    let dir = prepare_out(cfg, "classify")?;
    let mut labels = vec![None; data.n()];
    let mut rows = Vec::new();
    let title;
    if path.ends_with(".jsonl") {
        let f = File::open(path).map_err(|e| Error::InvalidInput(format!("cannot open {path}: {e}")))?;
        let samples = PosteriorSamples::read_jsonl(BufReader::new(f))?;
        let kind = match samples.meta.model {
            crate::model::ModelKind::Sglm => ClassifierKind::Sglm,
            crate::model::ModelKind::Sglmm => ClassifierKind::Sglmm,
            crate::model::ModelKind::IndependentProbit => ClassifierKind::BayesProbit,
            crate::model::ModelKind::LowRank => ClassifierKind::LowRank,
        };
        title = kind.tag().to_string();
        for (k, &site) in samples.meta.test_indices.iter().enumerate() {
            if site >= data.n() {
                return Err(Error::InvalidInput(format!("chain refers to location {site} beyond the data")));
            }
            let z0: Vec<f64> = samples.z_test.iter().map(|z| z[k]).collect();
            let s = posterior_predictive_from_latent(&z0, kind)?;
            let l = classify(&s, TieBreak::Zero)?;
            labels[site] = Some(l);
            rows.push(prediction_row(&data, site, &s, l));
        }
    } else {
        let f = File::open(path).map_err(|e| Error::InvalidInput(format!("cannot open {path}: {e}")))?;
        let saved = SavedClassifier::read_json(BufReader::new(f))
            .map_err(|e| Error::InvalidInput(format!("{path} is not a saved classifier: {e}")))?;
        title = saved.model.kind().tag().to_string();
        let mut sites = data.prediction_indices();
        if sites.is_empty() {
            sites = (0..data.n()).collect();
        }
        let scores = saved.model.decisions(&data, &sites, RngStream::new(cfg.seed(), 2))?;
        for (&site, s) in sites.iter().zip(&scores) {
            let l = classify(s, TieBreak::Zero)?;
            labels[site] = Some(l);
            rows.push(prediction_row(&data, site, s, l));
        }
    }
    write_predictions(BufWriter::new(File::create(dir.join("predictions.csv"))?), &rows)?;
    if cfg.plots.unwrap_or(false) {
        fs::write(dir.join("classification_map.svg"), classification_map(&title, &data, &labels))?;
    }
    Ok(())
}

fn write_reports(dir: &Path, rows: &[ReportRow], reports: &[(DatasetLabel, ErrorReport)]) -> Result<()> {
    write_report_csv(BufWriter::new(File::create(dir.join("report.csv"))?), rows)?;
    #[derive(Serialize)]
    struct Entry<'a> {
        #[serde(flatten)]
        label: &'a DatasetLabel,
        #[serde(flatten)]
        report: &'a ErrorReport,
    }
    let entries: Vec<Entry<'_>> = reports.iter().map(|(label, report)| Entry { label, report }).collect();
    write_json(&dir.join("report.json"), &entries)
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<()> {
    let data = load_data(cfg)?;
    data.check_training_response()?;
    let h = harness(cfg, cfg.classifier_list()?)?;
    let dir = prepare_out(cfg, "evaluate")?;
    let runs = evaluate_classifiers(&data, &h);
    let label = DatasetLabel {
        linear_component: cfg.scenario.clone().unwrap_or_else(|| "data".into()),
        dataset: cfg.data_path()?.display().to_string(),
        kappa: cfg.kappa.as_ref().and_then(|k| k.first().copied()),
    };
    let reports: Vec<ErrorReport> = runs.iter().map(|r| r.report.clone()).collect();
    let rows = report_rows(&label, &reports);
    let tagged: Vec<(DatasetLabel, ErrorReport)> = reports.into_iter().map(|r| (label.clone(), r)).collect();
    write_reports(&dir, &rows, &tagged)?;
    if cfg.plots.unwrap_or(false) {
        let maps = dir.join("maps");
        fs::create_dir_all(&maps)?;
        for r in &runs {
            let tag = r.report.classifier.tag();
            fs::write(maps.join(format!("{tag}.svg")), classification_map(tag, &data, &r.labels))?;
        }
    }
    Ok(())
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<()> {
    let component = cfg.component()?;
    let kappas = cfg.kappas();
    let reps = cfg.replicates.unwrap_or(1).max(1);
    let h = harness(cfg, cfg.classifier_list()?)?;
    let split = cfg.split.unwrap_or(SplitKind::Clustered);
    let mut tasks = Vec::new();
    for (ki, &kappa) in kappas.iter().enumerate() {
        for r in 0..reps {
            let seed = cfg.seed().wrapping_add((ki * reps + r) as u64 * 7919);
            tasks.push((kappa, r, scenario(cfg, kappa, seed)?));
        }
    }
    let dir = prepare_out(cfg, "compare")?;
    let results: Vec<Result<(DatasetLabel, Vec<ErrorReport>)>> = tasks
        .par_iter()
        .map(|(kappa, r, sc)| {
            let data = simulate_split(sc, split)?;
            let mut hc = h.clone();
            hc.stream = RngStream::new(sc.seed, 3);
            hc.mcmc.rng = RngStream::new(sc.seed, 4);
            let reports = evaluate_classifiers(&data, &hc).into_iter().map(|x| x.report).collect();
            Ok((
                DatasetLabel {
                    linear_component: component.tag().to_string(),
                    dataset: format!("rep{}", r + 1),
                    kappa: Some(*kappa),
                },
                reports,
            ))
        })
        .collect();
    let mut rows = Vec::new();
    let mut tagged = Vec::new();
    let mut sums: BTreeMap<String, BTreeMap<u64, (f64, usize)>> = BTreeMap::new();
    for res in results {
        let (label, reports) = res?;
        rows.extend(report_rows(&label, &reports));
        for rep in reports {
            if let (Some(t), Some(k)) = (rep.test_error, label.kappa) {
                let e = sums.entry(rep.classifier.tag().to_string()).or_default().entry(k.to_bits()).or_insert((0.0, 0));
                e.0 += t;
                e.1 += 1;
            }
            tagged.push((label.clone(), rep));
        }
    }
    write_reports(&dir, &rows, &tagged)?;
    if cfg.plots.unwrap_or(true) {
        let series: BTreeMap<String, Vec<(f64, f64)>> = sums
            .into_iter()
            .map(|(name, by_k)| (name, by_k.into_iter().map(|(k, (s, c))| (f64::from_bits(k), s / c as f64)).collect()))
            .collect();
        fs::write(
            dir.join("error_vs_kappa.svg"),
            error_vs_kappa_chart(&format!("{component}: mean test error"), &series),
        )?;
    }
    Ok(())
}
