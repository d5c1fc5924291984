use serde::{Deserialize, Serialize};

use super::{evaluate, AugmentationKind, EvalError, FoldPlan, VariantSpec};
use crate::aggregation::StrategyKind;
use crate::augmentation::AugmentationSpec;
use crate::classifier::GridSearchSpec;
use crate::dataset::{sparsify, Dataset};
use crate::seeds::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsitySweepSpec {
    pub strategy: StrategyKind,
    pub p_max: f64,
    pub step: f64,
    /// Sparsified matrices drawn per removal probability.
    pub reps: usize,
    pub seed: u64,
}

impl Default for SparsitySweepSpec {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::Ave,
            p_max: 0.8,
            step: 0.1,
            reps: 3,
            seed: 0,
        }
    }
}

impl SparsitySweepSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.step > 0.0 && self.step <= self.p_max && self.p_max <= 1.0) {
            return Err(EvalError::Sweep(format!(
                "need 0 < step <= p_max <= 1, got step {} and p_max {}",
                self.step, self.p_max
            )));
        }
        if self.reps == 0 {
            return Err(EvalError::Sweep("reps must be positive".into()));
        }
        Ok(())
    }

    /// Removal probabilities `0, step, 2*step, ...` up to `p_max`.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = (self.p_max / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityPoint {
    pub nominal_p: f64,
    /// Mean fraction of ratings actually removed.
    pub achieved_sparsity: f64,
    pub pacp_accuracy: f64,
    pub lcp_accuracy: f64,
}

/// Accuracy of PACP and LCP on one strategy as ratings are removed.
pub fn sparsity_sweep(
    dataset: &Dataset,
    spec: &SparsitySweepSpec,
    plan: &FoldPlan,
    aug: &AugmentationSpec,
    grid: &GridSearchSpec,
) -> Result<Vec<SparsityPoint>, EvalError> {
    spec.validate()?;
    let pacp = VariantSpec::pacp(spec.strategy);
    let lcp = VariantSpec::lcp(spec.strategy, AugmentationKind::None);
    let variants = [pacp, lcp];
    let mut points = Vec::new();
    for (i, p) in spec.probabilities().into_iter().enumerate() {
        let (mut sparsity, mut pacp_acc, mut lcp_acc) = (0.0, 0.0, 0.0);
        for r in 0..spec.reps {
            let seed = derive_seed(spec.seed, &[i as u64, r as u64]);
            let outcome = sparsify(dataset.ratings(), dataset.groups(), p, seed)?;
            sparsity += outcome.achieved_sparsity();
            let sparse = dataset.with_ratings(outcome.matrix)?;
            let report = evaluate(&sparse, &variants, plan, aug, grid)?;
            pacp_acc += report.variants[0].mean_accuracy;
            lcp_acc += report.variants[1].mean_accuracy;
        }
        let n = spec.reps as f64;
        tracing::info!(p, sparsity = sparsity / n, "sparsity level done");
        points.push(SparsityPoint {
            nominal_p: p,
            achieved_sparsity: sparsity / n,
            pacp_accuracy: pacp_acc / n,
            lcp_accuracy: lcp_acc / n,
        });
    }
    Ok(points)
}
