use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::discriminant::{decision_da, DiscriminantParams};
use super::glm::{decision_glm, GlmFit, Link};
use super::knn::{knn_c, knn_g};
use super::score::{ClassifierKind, DecisionScore};
use super::standardize::Scaler;
use super::svm::{svm_decision, Kernel, SvmModel};
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::sampler::RngStream;
use crate::spatial_alt::{
    mardia_classify, press_classify, spatial_lda_decision, switzer_classify, CovariateField, MardiaParams, PressModel,
    SpatialLdaParams, SwitzerModel,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Stored training set of a nearest-neighbour rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    /// Neighbours in geographic rather than covariate space.
    pub geographic: bool,
    pub k: usize,
    pub scaler: Option<Scaler>,
    /// Scaled covariates, or coordinates when `geographic`.
    pub train: Vec<Vec<f64>>,
    pub y: Vec<u8>,
}

/// Fitted plug-in classifiers that can be written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "classifier", rename_all = "snake_case")]
pub enum FittedClassifier {
    Glm(GlmFit),
    Discriminant(DiscriminantParams),
    Svm(SvmModel),
    Knn(KnnModel),
    Switzer(SwitzerModel),
    Mardia(MardiaParams),
    SpatialLda(SpatialLdaParams),
    Press(PressModel),
}

impl FittedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            FittedClassifier::Glm(g) => match g.link {
                Link::Logit => ClassifierKind::GlmLogit,
                Link::Probit => ClassifierKind::GlmProbit,
            },
            FittedClassifier::Discriminant(d) => d.kind.classifier(),
            FittedClassifier::Svm(s) => match s.kernel {
                Kernel::Linear => ClassifierKind::SvmLinear,
                Kernel::Poly { .. } => ClassifierKind::SvmCubic,
                Kernel::Radial { .. } => ClassifierKind::SvmRadial,
            },
            FittedClassifier::Knn(k) if k.geographic => ClassifierKind::KnnG,
            FittedClassifier::Knn(_) => ClassifierKind::KnnC,
            FittedClassifier::Switzer(_) => ClassifierKind::Switzer,
            FittedClassifier::Mardia(_) => ClassifierKind::Mardia,
            FittedClassifier::SpatialLda(_) => ClassifierKind::SpatialLda,
            FittedClassifier::Press(_) => ClassifierKind::Press,
        }
    }

    /// Decision scores at `sites` of `data`; `stream` drives Press tie-breaks.
    pub fn decisions(&self, data: &Dataset, sites: &[usize], stream: RngStream) -> Result<Vec<DecisionScore>> {
        let n = data.n();
        if let Some(&bad) = sites.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        let kind = self.kind();
        let field = match self {
            FittedClassifier::Switzer(_) | FittedClassifier::Mardia(_) | FittedClassifier::Press(_) => {
                Some(CovariateField::from_dataset(data)?)
            }
            _ => None,
        };
        sites
            .iter()
            .map(|&i| -> Result<DecisionScore> {
                let mut s = match self {
                    FittedClassifier::Glm(g) => decision_glm(&data.design_row(i), &g.beta, g.link)?,
                    FittedClassifier::Discriminant(d) => decision_da(d, &data.covariate_row(i))?,
                    FittedClassifier::Svm(m) => svm_decision(m, &data.covariate_row(i)),
                    FittedClassifier::Knn(m) if m.geographic => {
                        let sites: Vec<[f64; 2]> = m.train.iter().map(|r| [r[0], r[1]]).collect();
                        let p = data.points()[i];
                        knn_g(p, &sites, &m.y, m.k)?
                    }
                    FittedClassifier::Knn(m) => {
                        let raw = data.covariate_row(i);
                        let x0 = m.scaler.as_ref().map_or(raw.clone(), |s| s.transform(&raw));
                        knn_c(&x0, &m.train, &m.y, m.k)?
                    }
                    FittedClassifier::Switzer(m) => switzer_classify(m, field.as_ref().expect("field"), i)?.score,
                    FittedClassifier::Mardia(p) => mardia_classify(p, field.as_ref().expect("field"), i)?,
                    FittedClassifier::SpatialLda(p) => {
                        spatial_lda_decision(p, &data.covariate_row(i), &p.u_basis.eval(data.coords[i]))?
                    }
                    FittedClassifier::Press(m) => {
                        press_classify(m, field.as_ref().expect("field"), i, &mut stream.child(i as u64).rng())?
                    }
                };
                s.source = kind;
                Ok(s)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedClassifier {
    pub schema_version: u32,
    #[serde(flatten)]
    pub model: FittedClassifier,
}

impl SavedClassifier {
    pub fn new(model: FittedClassifier) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            model,
        }
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let saved: Self = serde_json::from_reader(r)?;
        if saved.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported classifier schema version {}",
                saved.schema_version
            )));
        }
        Ok(saved)
    }
}
