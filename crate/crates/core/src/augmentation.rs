//! Synthetic training profiles.
//!
//! *Winners* adds one one-hot profile per option, labeled with that option.
//! *Permutations* relabels observed profiles: a target choice `j` is sampled
//! from a distribution `p`, a training profile whose choice differs from `j` is
//! drawn, and its scores are permuted so that the chosen option's score moves
//! to position `j`. The remaining scores are placed uniformly at random.

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prediction::{LabeledGroup, Origin};
use crate::seeds::rng_for;

#[derive(Debug, Error, PartialEq)]
pub enum AugmentationError {
    #[error("empty training set")]
    EmptyTraining,
    #[error("option {} has positive target probability but every training group chose it", .0 + 1)]
    UnreachableClass(usize),
    #[error("invalid target distribution: {0}")]
    InvalidDistribution(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub winners: bool,
    pub n_permutations: usize,
    /// Target label distribution for permutations; `None` uses the training choice frequencies.
    pub target_distribution: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for AugmentationSpec {
    fn default() -> Self {
        Self {
            winners: false,
            n_permutations: 1200,
            target_distribution: None,
            seed: 0,
        }
    }
}

/// Appends one one-hot profile per option, labeled with the hot option.
pub fn add_winners(training: &[LabeledGroup], n_options: usize) -> Vec<LabeledGroup> {
    let mut out = training.to_vec();
    out.extend((0..n_options).map(|j| {
        let mut profile = vec![0.0; n_options];
        profile[j] = 1.0;
        LabeledGroup {
            group_id: format!("winner-{}", j + 1),
            profile,
            choice: j,
            origin: Origin::Winner,
        }
    }));
    out
}

/// Relative choice frequencies in `training`.
pub fn choice_distribution(training: &[LabeledGroup], n_options: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n_options];
    for l in training {
        counts[l.choice] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

/// Moves the score at `source_choice` to `target` and places the other scores
/// uniformly at random in the remaining positions.
pub fn permute_profile<R: Rng>(profile: &[f64], source_choice: usize, target: usize, rng: &mut R) -> Vec<f64> {
    let n = profile.len();
    let mut free: Vec<usize> = (0..n).filter(|&i| i != target).collect();
    free.shuffle(rng);
    let mut out = vec![0.0; n];
    out[target] = profile[source_choice];
    let others = (0..n).filter(|&i| i != source_choice);
    for (old, new) in others.zip(free) {
        out[new] = profile[old];
    }
    out
}

/// Appends `spec.n_permutations` permuted profiles.
pub fn add_permutations(
    training: &[LabeledGroup],
    spec: &AugmentationSpec,
) -> Result<Vec<LabeledGroup>, AugmentationError> {
    let first = training.first().ok_or(AugmentationError::EmptyTraining)?;
    let n = first.profile.len();
    let p = match &spec.target_distribution {
        Some(p) => p.clone(),
        None => choice_distribution(training, n),
    };
    if p.len() != n {
        return Err(AugmentationError::InvalidDistribution(format!(
            "{} probabilities for {n} options",
            p.len()
        )));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(AugmentationError::InvalidDistribution(
            "entries must be non-negative and sum to 1".into(),
        ));
    }
    // sources[j]: training entries whose choice differs from j
    let sources: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..training.len()).filter(|&i| training[i].choice != j).collect())
        .collect();
    if let Some(j) = (0..n).find(|&j| p[j] > 0.0 && sources[j].is_empty()) {
        return Err(AugmentationError::UnreachableClass(j));
    }

    let mut out = training.to_vec();
    if spec.n_permutations == 0 {
        return Ok(out);
    }
    let sampler = WeightedIndex::new(&p).map_err(|e| AugmentationError::InvalidDistribution(e.to_string()))?;
    let mut rng = rng_for(spec.seed, &[]);
    out.reserve(spec.n_permutations);
    for i in 0..spec.n_permutations {
        let j = rng.sample(&sampler);
        let src = &training[sources[j][rng.random_range(0..sources[j].len())]];
        out.push(LabeledGroup {
            group_id: format!("perm-{}-of-{}", i + 1, src.group_id),
            profile: permute_profile(&src.profile, src.choice, j, &mut rng),
            choice: j,
            origin: Origin::Permutation,
        });
    }
    Ok(out)
}
