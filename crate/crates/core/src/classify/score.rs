use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies the classifier that produced a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    GlmLogit,
    GlmProbit,
    BayesProbit,
    Sglm,
    Sglmm,
    LowRank,
    Lda,
    Dlda,
    Qda,
    SvmLinear,
    SvmCubic,
    SvmRadial,
    KnnC,
    KnnG,
    Switzer,
    Mardia,
    SpatialLda,
    Press,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 18] = [
        ClassifierKind::GlmLogit,
        ClassifierKind::GlmProbit,
        ClassifierKind::BayesProbit,
        ClassifierKind::Sglm,
        ClassifierKind::Sglmm,
        ClassifierKind::LowRank,
        ClassifierKind::Lda,
        ClassifierKind::Dlda,
        ClassifierKind::Qda,
        ClassifierKind::SvmLinear,
        ClassifierKind::SvmCubic,
        ClassifierKind::SvmRadial,
        ClassifierKind::KnnC,
        ClassifierKind::KnnG,
        ClassifierKind::Switzer,
        ClassifierKind::Mardia,
        ClassifierKind::SpatialLda,
        ClassifierKind::Press,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ClassifierKind::GlmLogit => "glm-logit",
            ClassifierKind::GlmProbit => "glm-probit",
            ClassifierKind::BayesProbit => "bayes-probit",
            ClassifierKind::Sglm => "sglm",
            ClassifierKind::Sglmm => "sglmm",
            ClassifierKind::LowRank => "lowrank",
            ClassifierKind::Lda => "lda",
            ClassifierKind::Dlda => "dlda",
            ClassifierKind::Qda => "qda",
            ClassifierKind::SvmLinear => "svm-linear",
            ClassifierKind::SvmCubic => "svm-cubic",
            ClassifierKind::SvmRadial => "svm-radial",
            ClassifierKind::KnnC => "knn-c",
            ClassifierKind::KnnG => "knn-g",
            ClassifierKind::Switzer => "switzer",
            ClassifierKind::Mardia => "mardia",
            ClassifierKind::SpatialLda => "spatial-lda",
            ClassifierKind::Press => "press",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        let t = tag.trim().to_ascii_lowercase().replace('_', "-");
        let t = match t.as_str() {
            "probit" | "indep-probit" => "bayes-probit",
            "logit" | "logistic" => "glm-logit",
            "slda" => "spatial-lda",
            other => other,
        };
        Self::ALL.into_iter().find(|k| k.tag() == t)
    }

    /// Bayesian latent-variable models reporting posterior-predictive training errors.
    pub fn is_latent_model(self) -> bool {
        matches!(
            self,
            ClassifierKind::BayesProbit | ClassifierKind::Sglm | ClassifierKind::Sglmm | ClassifierKind::LowRank
        )
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Decision value `delta = p1 / p0` with the class-1 probability when one exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionScore {
    pub delta: f64,
    pub p1: Option<f64>,
    pub source: ClassifierKind,
}

impl DecisionScore {
    pub fn from_probability(p1: f64, source: ClassifierKind) -> Self {
        let delta = if p1 >= 1.0 { f64::INFINITY } else { p1 / (1.0 - p1) };
        Self {
            delta,
            p1: Some(p1),
            source,
        }
    }

    /// Score from `log delta`, with `p1` the logistic transform.
    pub fn from_log_odds(log_delta: f64, source: ClassifierKind) -> Self {
        let p1 = if log_delta >= 0.0 {
            1.0 / (1.0 + (-log_delta).exp())
        } else {
            let e = log_delta.exp();
            e / (1.0 + e)
        };
        Self {
            delta: log_delta.exp(),
            p1: Some(p1),
            source,
        }
    }

    /// Score without a class probability (margin or vote based).
    pub fn from_delta(delta: f64, source: ClassifierKind) -> Self {
        Self { delta, p1: None, source }
    }

    pub fn log_delta(&self) -> f64 {
        self.delta.ln()
    }
}

/// Resolution of `delta == 1`.
pub enum TieBreak<'a> {
    /// Class 0, following the strict inequality `delta > 1`.
    Zero,
    /// Fair coin.
    Random(&'a mut dyn RngCore),
}

/// Class 1 iff `delta > 1`.
pub fn classify(score: &DecisionScore, tie: TieBreak<'_>) -> Result<u8> {
    let d = score.delta;
    if d.is_nan() || d < 0.0 {
        return Err(Error::InvalidInput(format!("decision value {d} is not a nonnegative number")));
    }
    Ok(if d > 1.0 {
        1
    } else if d < 1.0 {
        0
    } else {
        match tie {
            TieBreak::Zero => 0,
            TieBreak::Random(rng) => u8::from(rng.random::<bool>()),
        }
    })
}
