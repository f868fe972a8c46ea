//! Probabilistic unimodal classifiers behind one common contract: a
//! regularized linear discriminant with Bayes-rule posteriors, and a linear
//! margin classifier with sigmoid-calibrated probabilities.

mod lda;
mod svm;

pub use lda::LdaModel;
pub use svm::{platt_fit, platt_predict, ClassHead, LinearSvmModel, PlattParams};

use crate::domain::{Channel, Dataset, PoseLabel, LABEL_COUNT};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("feature has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("training data contains a single class; need at least two")]
    SingleClassTraining,
    #[error("ridge must be positive, got {0}")]
    BadRidge(f64),
    #[error("no classifier fitted for channel {0}")]
    MissingClassifier(Channel),
    #[error("datapoint {index} lacks features for channel {channel}")]
    MissingFeature { index: usize, channel: Channel },
}

/// A point on the probability simplex over the pose labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector {
    values: Vec<f64>,
}

const SIMPLEX_TOL: f64 = 1e-9;

impl ProbabilityVector {
    /// Normalize nonnegative scores onto the simplex. All-zero input maps to
    /// the uniform distribution.
    pub fn from_scores(mut values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite() && *v >= 0.0));
        let sum: f64 = values.iter().sum();
        if sum <= 0.0 {
            let u = 1.0 / values.len() as f64;
            for v in &mut values {
                *v = u;
            }
        } else {
            for v in &mut values {
                *v /= sum;
            }
        }
        ProbabilityVector { values }
    }

    pub fn uniform(len: usize) -> Self {
        ProbabilityVector {
            values: vec![1.0 / len as f64; len],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Index of the largest entry; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn is_on_simplex(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0 && v.is_finite())
            && (self.values.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL
    }
}

/// Common prediction contract for fitted unimodal classifiers.
pub trait ProbabilisticClassifier {
    /// Posterior over all pose labels for one feature vector.
    fn predict_proba(&self, features: &[f64]) -> Result<ProbabilityVector, ClassifierError>;

    /// Expected feature dimension.
    fn dim(&self) -> usize;
}

/// Which classifier family to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierKind {
    Lda,
    Svc,
}

impl ClassifierKind {
    pub fn tag(self) -> &'static str {
        match self {
            ClassifierKind::Lda => "lda",
            ClassifierKind::Svc => "svc",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "lda" => Some(ClassifierKind::Lda),
            "svc" => Some(ClassifierKind::Svc),
            _ => None,
        }
    }
}

/// Training hyperparameters, shared across channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub kind: ClassifierKind,
    pub lda_ridge: f64,
    pub svc_c: f64,
    pub svc_epochs: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            kind: ClassifierKind::Lda,
            lda_ridge: 1e-3,
            svc_c: 0.5,
            svc_epochs: 30,
            seed: 0,
        }
    }
}

/// A fitted classifier of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnyClassifier {
    Lda(LdaModel),
    Svm(LinearSvmModel),
}

impl ProbabilisticClassifier for AnyClassifier {
    fn predict_proba(&self, features: &[f64]) -> Result<ProbabilityVector, ClassifierError> {
        match self {
            AnyClassifier::Lda(m) => m.predict_proba(features),
            AnyClassifier::Svm(m) => m.predict_proba(features),
        }
    }

    fn dim(&self) -> usize {
        match self {
            AnyClassifier::Lda(m) => m.dim(),
            AnyClassifier::Svm(m) => m.dim(),
        }
    }
}

/// Fit one classifier per channel of the dataset.
pub fn fit_channel_classifiers(
    ds: &Dataset,
    params: &TrainParams,
) -> Result<BTreeMap<Channel, AnyClassifier>, ClassifierError> {
    let labels: Vec<PoseLabel> = ds.labels().collect();
    let mut out = BTreeMap::new();
    for channel in ds.config().channels() {
        let features: Vec<&[f64]> = ds
            .points()
            .iter()
            .enumerate()
            .map(|(index, p)| {
                p.feature(channel)
                    .map(|f| f.values.as_slice())
                    .ok_or(ClassifierError::MissingFeature { index, channel })
            })
            .collect::<Result<_, _>>()?;
        let clf = match params.kind {
            ClassifierKind::Lda => {
                AnyClassifier::Lda(LdaModel::fit(&features, &labels, params.lda_ridge)?)
            }
            ClassifierKind::Svc => AnyClassifier::Svm(LinearSvmModel::fit(
                &features,
                &labels,
                params.svc_c,
                params.svc_epochs,
                params.seed,
            )?),
        };
        out.insert(channel, clf);
    }
    Ok(out)
}

/// Per-label probabilities for every channel of one datapoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScores {
    pub columns: BTreeMap<Channel, ProbabilityVector>,
}

impl ChannelScores {
    pub fn column(&self, channel: Channel) -> Option<&ProbabilityVector> {
        self.columns.get(&channel)
    }
}

/// Score every datapoint with every channel classifier. The classifier map
/// must cover the dataset's channel set.
pub fn score_dataset<C: ProbabilisticClassifier>(
    clfs: &BTreeMap<Channel, C>,
    ds: &Dataset,
) -> Result<Vec<ChannelScores>, ClassifierError> {
    let channels = ds.config().channels();
    for &c in &channels {
        if !clfs.contains_key(&c) {
            return Err(ClassifierError::MissingClassifier(c));
        }
    }
    let mut out = Vec::with_capacity(ds.len());
    for (index, p) in ds.points().iter().enumerate() {
        let mut columns = BTreeMap::new();
        for &channel in &channels {
            let fv = p
                .feature(channel)
                .ok_or(ClassifierError::MissingFeature { index, channel })?;
            let proba = clfs[&channel].predict_proba(&fv.values)?;
            columns.insert(channel, proba);
        }
        out.push(ChannelScores { columns });
    }
    Ok(out)
}

/// Log-sum-exp over a slice, ignoring -inf entries.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = values
        .iter()
        .map(|&v| {
            if v == f64::NEG_INFINITY {
                0.0
            } else {
                (v - m).exp()
            }
        })
        .sum();
    m + s.ln()
}

pub(crate) const N_LABELS: usize = LABEL_COUNT;
