use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Sglm,
    Sglmm,
    IndependentProbit,
    LowRank,
}

impl ModelKind {
    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Sglm => "sglm",
            ModelKind::Sglmm => "sglmm",
            ModelKind::IndependentProbit => "probit",
            ModelKind::LowRank => "lowrank",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeEntry {
    pub parameter: String,
    /// `None` when the chain was constant or too short.
    pub z: Option<f64>,
}

/// Settings and diagnostics attached to a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub model: ModelKind,
    pub iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub rng: RngStream,
    pub kappa_fixed: Option<f64>,
    pub column_names: Vec<String>,
    pub train_indices: Vec<usize>,
    /// Locations whose latent draws are stored in `z_test`, in order.
    pub test_indices: Vec<usize>,
    pub rho_acceptance: Option<f64>,
    pub kappa_acceptance: Option<f64>,
    pub rho_proposal_sd: Option<f64>,
    pub kappa_proposal_sd: Option<f64>,
    pub lowrank_rank: Option<usize>,
    pub geweke: Vec<GewekeEntry>,
    pub geweke_flagged: bool,
    pub wall_time_secs: f64,
}

/// Retained posterior draws on the identified scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    /// `T x p`.
    pub beta: Vec<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
    pub kappa: Option<Vec<f64>>,
    pub gamma2: Vec<f64>,
    /// `T x n_test` latent draws at `meta.test_indices`.
    pub z_test: Vec<Vec<f64>>,
    /// `T x n_train` latent draws at `meta.train_indices`; not serialised to the chain file.
    pub z_train: Vec<Vec<f64>>,
    pub meta: SampleMeta,
}

#[derive(Serialize, Deserialize)]
struct ChainRecord {
    beta: Vec<f64>,
    rho: Option<f64>,
    kappa: Option<f64>,
    gamma2: f64,
    z_test: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MetaHeader {
    meta: SampleMeta,
}

impl PosteriorSamples {
    pub fn len(&self) -> usize {
        self.gamma2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma2.is_empty()
    }

    pub fn p(&self) -> usize {
        self.beta.first().map_or(0, Vec::len)
    }

    pub fn beta_column(&self, k: usize) -> Vec<f64> {
        self.beta.iter().map(|b| b[k]).collect()
    }

    pub fn beta_mean(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(Error::EmptyChain);
        }
        let t = self.len() as f64;
        Ok((0..self.p()).map(|k| self.beta.iter().map(|b| b[k]).sum::<f64>() / t).collect())
    }

    pub fn rho_at(&self, t: usize) -> Option<f64> {
        self.rho.as_ref().map(|r| r[t])
    }

    pub fn kappa_at(&self, t: usize) -> Option<f64> {
        self.kappa.as_ref().map(|k| k[t])
    }

    /// Equal-tailed credible interval for coefficient `k`.
    pub fn beta_interval(&self, k: usize, level: f64) -> Result<(f64, f64)> {
        if self.is_empty() {
            return Err(Error::EmptyChain);
        }
        let mut v = self.beta_column(k);
        v.sort_by(f64::total_cmp);
        let alpha = (1.0 - level) / 2.0;
        Ok((quantile_sorted(&v, alpha), quantile_sorted(&v, 1.0 - alpha)))
    }

    /// Writes a metadata header line followed by one record per retained iteration.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, &MetaHeader { meta: self.meta.clone() })?;
        writeln!(w)?;
        for t in 0..self.len() {
            let rec = ChainRecord {
                beta: self.beta[t].clone(),
                rho: self.rho_at(t),
                kappa: self.kappa_at(t),
                gamma2: self.gamma2[t],
                z_test: self.z_test.get(t).cloned().unwrap_or_default(),
            };
            serde_json::to_writer(&mut w, &rec)?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads a chain file; training latents are not part of the format and come back empty.
    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("chain file is empty".into()))??;
        let MetaHeader { meta } = serde_json::from_str(&header)?;
        let mut beta = Vec::new();
        let mut rho = Vec::new();
        let mut kappa = Vec::new();
        let mut gamma2 = Vec::new();
        let mut z_test = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ChainRecord = serde_json::from_str(&line)?;
            beta.push(rec.beta);
            rho.push(rec.rho);
            kappa.push(rec.kappa);
            gamma2.push(rec.gamma2);
            z_test.push(rec.z_test);
        }
        let collect = |v: Vec<Option<f64>>| -> Option<Vec<f64>> { v.into_iter().collect() };
        Ok(Self {
            beta,
            rho: collect(rho),
            kappa: collect(kappa),
            gamma2,
            z_test,
            z_train: Vec::new(),
            meta,
        })
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn dummy_meta() -> SampleMeta {
        SampleMeta {
            model: ModelKind::Sglmm,
            iters: 2,
            burn_in: 0,
            thin: 1,
            rng: RngStream::new(1, 0),
            kappa_fixed: None,
            column_names: vec!["intercept".into()],
            train_indices: vec![0],
            test_indices: vec![1],
            rho_acceptance: Some(0.4),
            kappa_acceptance: Some(0.3),
            rho_proposal_sd: Some(0.05),
            kappa_proposal_sd: Some(0.1),
            lowrank_rank: None,
            geweke: vec![],
            geweke_flagged: false,
            wall_time_secs: 0.0,
        }
    }

    #[test]
    fn jsonl_round_trip_and_field_names() {
        let s = PosteriorSamples {
            beta: vec![vec![0.5], vec![0.25]],
            rho: Some(vec![0.9, 0.8]),
            kappa: Some(vec![0.4, 0.6]),
            gamma2: vec![1.0, 2.0],
            z_test: vec![vec![0.1], vec![-0.3]],
            z_train: vec![],
            meta: dummy_meta(),
        };
        let mut buf = Vec::new();
        s.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let second: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        let mut keys: Vec<&str> = second.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["beta", "gamma2", "kappa", "rho", "z_test"]);
        let back = PosteriorSamples::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn interval_of_uniform_grid() {
        let mut s = PosteriorSamples {
            beta: (0..=100).map(|i| vec![i as f64]).collect(),
            rho: None,
            kappa: None,
            gamma2: vec![1.0; 101],
            z_test: vec![],
            z_train: vec![],
            meta: dummy_meta(),
        };
        s.meta.model = ModelKind::IndependentProbit;
        let (lo, hi) = s.beta_interval(0, 0.9).unwrap();
        assert!((lo - 5.0).abs() < 1e-12 && (hi - 95.0).abs() < 1e-12);
    }
}
