use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, ClassifierError, TrainConfig};
use crate::seeds::rng_for;

/// Candidate values of `C` scored by inner cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchSpec {
    pub candidates: Vec<f64>,
    pub inner_folds: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl GridSearchSpec {
    pub const DEFAULT_INNER_FOLDS: usize = 3;

    pub fn with_candidates(candidates: Vec<f64>) -> Self {
        Self {
            candidates,
            inner_folds: Self::DEFAULT_INNER_FOLDS,
            max_iterations: TrainConfig::DEFAULT_MAX_ITERATIONS,
            tolerance: TrainConfig::DEFAULT_TOLERANCE,
        }
    }

    /// 20 log-spaced values from 0.1 to 50.
    pub fn coarse() -> Self {
        let (lo, hi) = (0.1f64.ln(), 50f64.ln());
        Self::with_candidates((0..20).map(|i| (lo + (hi - lo) * i as f64 / 19.0).exp()).collect())
    }

    /// 0.1, 0.2, ..., 50.0 (500 values).
    pub fn full() -> Self {
        Self::with_candidates((1..=500).map(|i| i as f64 / 10.0).collect())
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.candidates.is_empty() {
            return Err(ClassifierError::InvalidConfig("empty C grid".into()));
        }
        if let Some(c) = self.candidates.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(ClassifierError::InvalidConfig(format!("C candidate {c} is not > 0")));
        }
        if self.inner_folds < 2 {
            return Err(ClassifierError::InvalidConfig("need at least 2 inner folds".into()));
        }
        Ok(())
    }

    fn config(&self, c: f64, seed: u64) -> TrainConfig {
        TrainConfig {
            c,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            seed,
        }
    }
}

impl Default for GridSearchSpec {
    fn default() -> Self {
        Self::coarse()
    }
}

/// Fold index per example. Each class is shuffled on its own and dealt
/// round-robin, continuing the count across classes, so folds stay balanced in
/// size and classes spread over folds as far as their counts allow.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Vec<usize> {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = rng_for(seed, &[]);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

/// Picks the `C` with the best mean inner-CV accuracy; ties go to the smaller `C`.
pub fn grid_search<F: AsRef<[f64]> + Sync>(
    features: &[F],
    labels: &[usize],
    n_classes: usize,
    spec: &GridSearchSpec,
    seed: u64,
) -> Result<TrainConfig, ClassifierError> {
    spec.validate()?;
    if features.len() < spec.inner_folds {
        return Err(ClassifierError::TooFewExamples {
            examples: features.len(),
            folds: spec.inner_folds,
        });
    }
    if labels.len() != features.len() {
        return Err(ClassifierError::LabelCount(labels.len(), features.len()));
    }
    if spec.candidates.len() == 1 {
        return Ok(spec.config(spec.candidates[0], seed));
    }
    let scores = cv_accuracies(features, labels, n_classes, spec, seed)?;
    let mut best: Option<(f64, f64)> = None;
    for (&c, &acc) in spec.candidates.iter().zip(&scores) {
        best = match best {
            Some((bc, ba)) if ba > acc || (ba == acc && bc <= c) => Some((bc, ba)),
            _ => Some((c, acc)),
        };
    }
    let (c, _) = best.expect("non-empty grid");
    Ok(spec.config(c, seed))
}

/// Mean inner-CV accuracy of every candidate, in candidate order.
pub(crate) fn cv_accuracies<F: AsRef<[f64]> + Sync>(
    features: &[F],
    labels: &[usize],
    n_classes: usize,
    spec: &GridSearchSpec,
    seed: u64,
) -> Result<Vec<f64>, ClassifierError> {
    let folds = stratified_folds(labels, spec.inner_folds, seed);
    spec.candidates
        .par_iter()
        .map(|&c| {
            let cfg = spec.config(c, seed);
            let mut total = 0.0;
            for f in 0..spec.inner_folds {
                let (mut tr_x, mut tr_y, mut te) = (Vec::new(), Vec::new(), Vec::new());
                for i in 0..features.len() {
                    if folds[i] == f {
                        te.push(i);
                    } else {
                        tr_x.push(features[i].as_ref());
                        tr_y.push(labels[i]);
                    }
                }
                let model = train(&tr_x, &tr_y, n_classes, &cfg)?;
                let mut correct = 0usize;
                for &i in &te {
                    if model.predict(features[i].as_ref())? == labels[i] {
                        correct += 1;
                    }
                }
                total += correct as f64 / te.len() as f64;
            }
            Ok(total / spec.inner_folds as f64)
        })
        .collect()
}
