//! Multinomial logistic regression with an L2 penalty on the weights.
//!
//! Training is deterministic full-batch gradient descent from zero weights with a
//! backtracking (Armijo) line search. Trial steps use the Barzilai-Borwein
//! estimate from the previous iteration; every accepted step decreases the loss.

mod grid;
mod objective;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::{grid_search, stratified_folds, GridSearchSpec};
pub use objective::SoftmaxObjective;
pub use train::{train, train_with_trace, TrainOutcome};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("no training examples")]
    Empty,
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature {feature} of example {example} is not finite")]
    NonFinite { example: usize, feature: usize },
    #[error("label {label} of example {example} is not below {n_classes}")]
    InvalidLabel {
        example: usize,
        label: usize,
        n_classes: usize,
    },
    #[error("{0} labels for {1} examples")]
    LabelCount(usize, usize),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("{examples} examples cannot be split into {folds} folds")]
    TooFewExamples { examples: usize, folds: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub max_iterations: usize,
    /// Training stops once an accepted step lowers the loss by less than this.
    pub tolerance: f64,
    /// Carried for provenance; training itself draws no random numbers.
    pub seed: u64,
}

impl TrainConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
    pub const DEFAULT_TOLERANCE: f64 = 1e-9;

    pub fn new(c: f64) -> Result<Self, ClassifierError> {
        let cfg = Self { c, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(ClassifierError::InvalidConfig(format!("C must be > 0, got {}", self.c)));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(ClassifierError::InvalidConfig(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            tolerance: Self::DEFAULT_TOLERANCE,
            seed: 0,
        }
    }
}

/// Weights (`n_features x n_classes`, row-major) and per-class bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct SoftmaxModel {
    n_features: usize,
    n_classes: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    weights: Vec<f64>,
    bias: Vec<f64>,
    n_classes: usize,
    c: f64,
}

impl TryFrom<ModelJson> for SoftmaxModel {
    type Error = String;

    fn try_from(m: ModelJson) -> Result<Self, Self::Error> {
        if m.n_classes == 0 || m.bias.len() != m.n_classes || !m.weights.len().is_multiple_of(m.n_classes) {
            return Err(format!(
                "inconsistent model: {} weights, {} biases, {} classes",
                m.weights.len(),
                m.bias.len(),
                m.n_classes
            ));
        }
        if m.weights.iter().chain(&m.bias).any(|v| !v.is_finite()) {
            return Err("model contains non-finite parameters".into());
        }
        Ok(Self {
            n_features: m.weights.len() / m.n_classes,
            n_classes: m.n_classes,
            weights: m.weights,
            bias: m.bias,
            c: m.c,
        })
    }
}

impl From<SoftmaxModel> for ModelJson {
    fn from(m: SoftmaxModel) -> Self {
        Self {
            weights: m.weights,
            bias: m.bias,
            n_classes: m.n_classes,
            c: m.c,
        }
    }
}

impl SoftmaxModel {
    /// The all-zero model; predicts the uniform distribution.
    pub fn zeros(n_features: usize, n_classes: usize, c: f64) -> Self {
        Self {
            n_features,
            n_classes,
            weights: vec![0.0; n_features * n_classes],
            bias: vec![0.0; n_classes],
            c,
        }
    }

    /// Builds a model from flat parameters laid out as in [`SoftmaxObjective`].
    pub fn from_params(params: &[f64], n_features: usize, n_classes: usize, c: f64) -> Self {
        let split = n_features * n_classes;
        Self {
            n_features,
            n_classes,
            weights: params[..split].to_vec(),
            bias: params[split..split + n_classes].to_vec(),
            c,
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn logits(&self, features: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        if features.len() != self.n_features {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.n_features,
                found: features.len(),
            });
        }
        let mut z = self.bias.clone();
        for (f, x) in features.iter().enumerate() {
            let row = &self.weights[f * self.n_classes..(f + 1) * self.n_classes];
            for (zk, w) in z.iter_mut().zip(row) {
                *zk += x * w;
            }
        }
        Ok(z)
    }

    pub fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        Ok(softmax(&self.logits(features)?))
    }

    /// Most probable class; the first index wins exact ties.
    pub fn predict(&self, features: &[f64]) -> Result<usize, ClassifierError> {
        Ok(first_argmax(&self.predict_proba(features)?))
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub(crate) fn first_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
