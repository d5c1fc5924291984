//! The two choice predictors.
//!
//! PACP returns the highest-scoring option of a group profile, drawing uniformly
//! among exact ties. LCP is a softmax classifier trained on labeled profiles.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::GroupProfile;
use crate::classifier::{self, grid_search, ClassifierError, GridSearchSpec, SoftmaxModel};
use crate::seeds::rng_for;

/// Scores within this distance of the maximum count as tied.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PredictionError {
    #[error("training set has a single class ({0}); no classifier can be fitted")]
    SingleClass(usize),
    #[error("empty training set")]
    EmptyTraining,
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Where a labeled profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Observed,
    Winner,
    Permutation,
}

/// A group profile with the option the group chose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledGroup {
    pub group_id: String,
    pub profile: Vec<f64>,
    pub choice: usize,
    pub origin: Origin,
}

impl LabeledGroup {
    pub fn observed(profile: &GroupProfile, choice: usize) -> Self {
        Self {
            group_id: profile.group_id.clone(),
            profile: profile.scores.clone(),
            choice,
            origin: Origin::Observed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoicePrediction {
    pub group_id: String,
    pub predicted_option: usize,
    /// Options sharing the maximum score (PACP only, empty for LCP).
    pub tie_set: Vec<usize>,
    /// Class probabilities (LCP only).
    pub probabilities: Option<Vec<f64>>,
}

pub fn pacp_predict(profile: &GroupProfile, seed: u64) -> ChoicePrediction {
    let (predicted_option, tie_set) = argmax_with_ties(&profile.scores, seed);
    ChoicePrediction {
        group_id: profile.group_id.clone(),
        predicted_option,
        tie_set,
        probabilities: None,
    }
}

/// Argmax of `scores`. When several entries tie for the maximum one of them is
/// drawn uniformly from a stream seeded with `seed`.
pub fn argmax_with_ties(scores: &[f64], seed: u64) -> (usize, Vec<usize>) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| max - **s <= TIE_EPSILON)
        .map(|(i, _)| i)
        .collect();
    let pick = if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng_for(seed, &[]).random_range(0..ties.len())]
    };
    (pick, ties)
}

// features, labels, class count
type Split<'a> = (Vec<&'a [f64]>, Vec<usize>, usize);

fn split_training(training: &[LabeledGroup]) -> Result<Split<'_>, PredictionError> {
    let first = training.first().ok_or(PredictionError::EmptyTraining)?;
    let n_classes = first.profile.len();
    let features = training.iter().map(|l| l.profile.as_slice()).collect();
    let labels: Vec<usize> = training.iter().map(|l| l.choice).collect();
    Ok((features, labels, n_classes))
}

/// Grid-searches `C` on the training profiles, then fits on all of them.
pub fn lcp_train(training: &[LabeledGroup], grid: &GridSearchSpec, seed: u64) -> Result<SoftmaxModel, PredictionError> {
    let (features, labels, n_classes) = split_training(training)?;
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(PredictionError::SingleClass(labels[0]));
    }
    let cfg = grid_search(&features, &labels, n_classes, grid, seed)?;
    Ok(classifier::train(&features, &labels, n_classes, &cfg)?)
}

pub fn lcp_predict(model: &SoftmaxModel, profile: &GroupProfile) -> Result<ChoicePrediction, PredictionError> {
    let probabilities = model.predict_proba(&profile.scores)?;
    Ok(ChoicePrediction {
        group_id: profile.group_id.clone(),
        predicted_option: classifier::first_argmax(&probabilities),
        tie_set: Vec::new(),
        probabilities: Some(probabilities),
    })
}

/// A fitted LCP, or the constant fallback when the training data had one class.
#[derive(Debug, Clone, PartialEq)]
pub enum LcpPredictor {
    Model(SoftmaxModel),
    Constant { option: usize, n_options: usize },
}

impl LcpPredictor {
    pub fn fit(training: &[LabeledGroup], grid: &GridSearchSpec, seed: u64) -> Result<Self, PredictionError> {
        match lcp_train(training, grid, seed) {
            Ok(model) => Ok(Self::Model(model)),
            Err(PredictionError::SingleClass(option)) => {
                tracing::warn!(option, "single-class training fold, predicting that class");
                Ok(Self::Constant {
                    option,
                    n_options: training[0].profile.len(),
                })
            }
            Err(e) => Err(e),
        }
    }

    pub fn predict(&self, profile: &GroupProfile) -> Result<ChoicePrediction, PredictionError> {
        match self {
            Self::Model(m) => lcp_predict(m, profile),
            Self::Constant { option, n_options } => {
                let mut probabilities = vec![0.0; *n_options];
                probabilities[*option] = 1.0;
                Ok(ChoicePrediction {
                    group_id: profile.group_id.clone(),
                    predicted_option: *option,
                    tie_set: Vec::new(),
                    probabilities: Some(probabilities),
                })
            }
        }
    }
}
