//! Repeated k-fold evaluation of PACP and LCP variants.
//!
//! One [`FoldPlan`] is shared by every variant of a run, so variants see the
//! same test groups in every repetition and their per-repetition accuracies
//! can be compared pairwise.

mod export;
mod metrics;
mod sparsity;
mod wilcoxon;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{aggregate, AggregationError, GroupProfile, StrategyKind};
use crate::augmentation::{add_permutations, add_winners, AugmentationError, AugmentationSpec};
use crate::classifier::GridSearchSpec;
use crate::dataset::{Dataset, DatasetError, Group};
use crate::prediction::{pacp_predict, LabeledGroup, LcpPredictor, Origin, PredictionError};
use crate::seeds::{derive_seed, rng_for};

pub use export::{write_accuracy_csv, write_confusion_csv, write_predictions_csv, write_sparsity_csv};
pub use metrics::{kl_divergence, ConfusionMatrix};
pub use sparsity::{sparsity_sweep, SparsityPoint, SparsitySweepSpec};
pub use wilcoxon::{wilcoxon_signed_rank, Alternative, WilcoxonError, WilcoxonResult, EXACT_MAX_PAIRS};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid fold plan: {0}")]
    Plan(String),
    #[error("invalid variant: {0}")]
    Variant(String),
    #[error("augmentation requested on a test fold")]
    AugmentedTestFold,
    #[error("test fold contains synthetic profile {0}")]
    SyntheticInTestFold(String),
    #[error("KL-divergence: {0}")]
    Kl(String),
    #[error("invalid sparsity sweep: {0}")]
    Sweep(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Augmentation(#[from] AugmentationError),
    #[error(transparent)]
    Prediction(#[from] PredictionError),
    #[error(transparent)]
    Wilcoxon(#[from] WilcoxonError),
}

/// Fold assignment of every group in every repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub n_repetitions: usize,
    pub seed: u64,
    pub group_ids: Vec<String>,
    /// `assignments[rep][i]` is the fold of `group_ids[i]` in repetition `rep`.
    pub assignments: Vec<Vec<usize>>,
}

/// Shuffles the groups independently per repetition and deals them into `k`
/// folds whose sizes differ by at most one.
pub fn make_fold_plan(groups: &[Group], k: usize, repetitions: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::Plan(format!("need at least 2 folds, got {k}")));
    }
    if groups.len() < k {
        return Err(EvalError::Plan(format!(
            "{} groups cannot fill {k} folds",
            groups.len()
        )));
    }
    if repetitions == 0 {
        return Err(EvalError::Plan("need at least one repetition".into()));
    }
    let assignments = (0..repetitions)
        .map(|rep| {
            let mut order: Vec<usize> = (0..groups.len()).collect();
            order.shuffle(&mut rng_for(seed, &[rep as u64]));
            let mut fold = vec![0; groups.len()];
            for (pos, g) in order.into_iter().enumerate() {
                fold[g] = pos % k;
            }
            fold
        })
        .collect();
    Ok(FoldPlan {
        n_folds: k,
        n_repetitions: repetitions,
        seed,
        group_ids: groups.iter().map(|g| g.id.clone()).collect(),
        assignments,
    })
}

impl FoldPlan {
    /// Group indices held out in `fold` of repetition `rep`.
    pub fn test_indices(&self, rep: usize, fold: usize) -> Vec<usize> {
        (0..self.group_ids.len())
            .filter(|&i| self.assignments[rep][i] == fold)
            .collect()
    }

    pub fn fold_sizes(&self, rep: usize) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.assignments[rep] {
            sizes[f] += 1;
        }
        sizes
    }

    fn check_against(&self, dataset: &Dataset) -> Result<(), EvalError> {
        let same = self.group_ids.len() == dataset.groups().len()
            && self.group_ids.iter().zip(dataset.groups()).all(|(a, g)| *a == g.id);
        if !same {
            return Err(EvalError::Plan("plan was built for a different group list".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "PACP")]
    Pacp,
    #[serde(rename = "LCP")]
    Lcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AugmentationKind {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "W")]
    Winners,
    #[serde(rename = "P")]
    Permutations,
}

impl AugmentationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AugmentationKind::None => "none",
            AugmentationKind::Winners => "W",
            AugmentationKind::Permutations => "P",
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            AugmentationKind::None => "",
            AugmentationKind::Winners => "-W",
            AugmentationKind::Permutations => "-P",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariantSpec {
    pub model: ModelKind,
    pub strategy: StrategyKind,
    pub augmentation: AugmentationKind,
}

impl VariantSpec {
    pub fn new(model: ModelKind, strategy: StrategyKind, augmentation: AugmentationKind) -> Result<Self, EvalError> {
        if model == ModelKind::Pacp && augmentation != AugmentationKind::None {
            return Err(EvalError::Variant("PACP has no training step to augment".into()));
        }
        Ok(Self {
            model,
            strategy,
            augmentation,
        })
    }

    pub fn pacp(strategy: StrategyKind) -> Self {
        Self {
            model: ModelKind::Pacp,
            strategy,
            augmentation: AugmentationKind::None,
        }
    }

    pub fn lcp(strategy: StrategyKind, augmentation: AugmentationKind) -> Self {
        Self {
            model: ModelKind::Lcp,
            strategy,
            augmentation,
        }
    }

    /// The model column of prediction exports: `PACP`, `LCP`, `LCP-W` or `LCP-P`.
    pub fn model_label(&self) -> String {
        let base = match self.model {
            ModelKind::Pacp => "PACP",
            ModelKind::Lcp => "LCP",
        };
        format!("{base}{}", self.augmentation.suffix())
    }

    /// Every PACP and LCP variant over `strategies`.
    pub fn full_grid(strategies: &[StrategyKind]) -> Vec<Self> {
        let mut out = Vec::new();
        for &s in strategies {
            out.push(Self::pacp(s));
            for aug in [
                AugmentationKind::None,
                AugmentationKind::Winners,
                AugmentationKind::Permutations,
            ] {
                out.push(Self::lcp(s, aug));
            }
        }
        out
    }
}

impl fmt::Display for AugmentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for VariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.model {
            ModelKind::Pacp => "PACP",
            ModelKind::Lcp => "LCP",
        };
        write!(f, "{base}-{}{}", self.strategy, self.augmentation.suffix())
    }
}

impl FromStr for VariantSpec {
    type Err = EvalError;

    /// Parses names such as `PACP-AVE`, `LCP-COPE` or `LCP-SDS3-P`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('-').collect();
        let model = match parts.first() {
            Some(&"PACP") => ModelKind::Pacp,
            Some(&"LCP") => ModelKind::Lcp,
            _ => return Err(EvalError::Variant(format!("`{s}` does not start with PACP or LCP"))),
        };
        let strategy: StrategyKind = parts
            .get(1)
            .ok_or_else(|| EvalError::Variant(format!("`{s}` has no strategy")))?
            .parse()?;
        let augmentation = match parts.get(2) {
            None => AugmentationKind::None,
            Some(&"W") => AugmentationKind::Winners,
            Some(&"P") => AugmentationKind::Permutations,
            Some(other) => return Err(EvalError::Variant(format!("unknown augmentation `{other}` in `{s}`"))),
        };
        if parts.len() > 3 {
            return Err(EvalError::Variant(format!("`{s}` has trailing parts")));
        }
        Self::new(model, strategy, augmentation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldRole {
    Train,
    Test,
}

/// One side of a train/test split. Only training folds accept synthetic profiles.
#[derive(Debug, Clone)]
pub struct FoldSet {
    role: FoldRole,
    items: Vec<LabeledGroup>,
}

impl FoldSet {
    pub fn new(role: FoldRole, items: Vec<LabeledGroup>) -> Self {
        Self { role, items }
    }

    pub fn items(&self) -> &[LabeledGroup] {
        &self.items
    }

    pub fn role(&self) -> FoldRole {
        self.role
    }

    pub fn augment(
        &mut self,
        kind: AugmentationKind,
        spec: &AugmentationSpec,
        n_options: usize,
    ) -> Result<(), EvalError> {
        if kind == AugmentationKind::None {
            return Ok(());
        }
        if self.role == FoldRole::Test {
            return Err(EvalError::AugmentedTestFold);
        }
        self.items = match kind {
            AugmentationKind::Winners => add_winners(&self.items, n_options),
            AugmentationKind::Permutations => add_permutations(&self.items, spec)?,
            AugmentationKind::None => unreachable!(),
        };
        Ok(())
    }

    /// Fails unless every item is an observed group.
    pub fn ensure_genuine(&self) -> Result<(), EvalError> {
        match self.items.iter().find(|l| l.origin != Origin::Observed) {
            Some(l) => Err(EvalError::SyntheticInTestFold(l.group_id.clone())),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub model: ModelKind,
    pub strategy: StrategyKind,
    pub augmentation: AugmentationKind,
    pub mean_accuracy: f64,
    pub rep_accuracies: Vec<f64>,
    pub confusion: ConfusionMatrix,
    pub kl: f64,
    /// `predictions[rep][i]`: option predicted for group `i` in repetition `rep`.
    #[serde(skip)]
    pub predictions: Vec<Vec<usize>>,
}

impl VariantResult {
    pub fn spec(&self) -> VariantSpec {
        VariantSpec {
            model: self.model,
            strategy: self.strategy,
            augmentation: self.augmentation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub a: String,
    pub b: String,
    /// One-sided Wilcoxon p-value for "a improves on b"; null when the test is undefined.
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub n_groups: usize,
    pub n_options: usize,
    pub n_folds: usize,
    pub n_repetitions: usize,
    pub augmentation_seed: u64,
    pub n_permutations: usize,
    pub grid_candidates: usize,
    pub inner_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variants: Vec<VariantResult>,
    pub significance: Vec<Significance>,
    pub plan_seed: u64,
    pub meta: RunMeta,
}

impl EvalReport {
    pub fn variant(&self, spec: &VariantSpec) -> Option<&VariantResult> {
        self.variants.iter().find(|v| v.spec() == *spec)
    }
}

const PACP_TIE_STREAM: u64 = 0x7061_6370;
const GRID_STREAM: u64 = 0x6772_6964;

/// Builds every profile for `strategies`, in dataset group order.
pub fn build_profiles(
    dataset: &Dataset,
    strategies: impl IntoIterator<Item = StrategyKind>,
) -> Result<BTreeMap<StrategyKind, Vec<GroupProfile>>, EvalError> {
    let mut out = BTreeMap::new();
    for s in strategies {
        if out.contains_key(&s) {
            continue;
        }
        let profiles = dataset
            .groups()
            .iter()
            .map(|g| aggregate(dataset.ratings(), g, s))
            .collect::<Result<Vec<_>, _>>()?;
        out.insert(s, profiles);
    }
    Ok(out)
}

/// Runs every variant over the plan and assembles the report.
///
/// Per repetition and fold: profiles of the training groups are (optionally)
/// augmented, LCP is grid-searched and fitted on them, and every test group is
/// predicted. PACP tie-breaks are seeded by (plan seed, repetition, group).
pub fn evaluate(
    dataset: &Dataset,
    variants: &[VariantSpec],
    plan: &FoldPlan,
    aug: &AugmentationSpec,
    grid: &GridSearchSpec,
) -> Result<EvalReport, EvalError> {
    plan.check_against(dataset)?;
    for v in variants {
        VariantSpec::new(v.model, v.strategy, v.augmentation)?;
    }
    let n_options = dataset.n_options();
    let profiles = build_profiles(dataset, variants.iter().map(|v| v.strategy))?;
    let choices = dataset.choices();

    let mut results = Vec::with_capacity(variants.len());
    for variant in variants {
        let profiles = &profiles[&variant.strategy];
        let jobs: Vec<(usize, usize)> = (0..plan.n_repetitions)
            .flat_map(|r| (0..plan.n_folds).map(move |f| (r, f)))
            .collect();
        let fold_predictions = jobs
            .par_iter()
            .map(|&(rep, fold)| predict_fold(variant, profiles, choices, plan, rep, fold, aug, grid, n_options))
            .collect::<Result<Vec<_>, EvalError>>()?;

        let mut predictions = vec![vec![0usize; choices.len()]; plan.n_repetitions];
        for (&(rep, _), preds) in jobs.iter().zip(fold_predictions) {
            for (i, p) in preds {
                predictions[rep][i] = p;
            }
        }
        let mut confusion = ConfusionMatrix::new(n_options);
        let rep_accuracies = predictions
            .iter()
            .map(|preds| {
                let mut correct = 0usize;
                for (&p, &a) in preds.iter().zip(choices) {
                    confusion.record(a, p);
                    correct += usize::from(p == a);
                }
                correct as f64 / choices.len() as f64
            })
            .collect::<Vec<_>>();
        let mean_accuracy = rep_accuracies.iter().sum::<f64>() / rep_accuracies.len() as f64;
        let kl = kl_divergence(&confusion.predicted_totals_f64(), &confusion.actual_totals_f64())?;
        results.push(VariantResult {
            model: variant.model,
            strategy: variant.strategy,
            augmentation: variant.augmentation,
            mean_accuracy,
            rep_accuracies,
            confusion,
            kl,
            predictions,
        });
    }

    let significance = significance_pairs(&results);
    Ok(EvalReport {
        variants: results,
        significance,
        plan_seed: plan.seed,
        meta: RunMeta {
            version: env!("CARGO_PKG_VERSION").to_owned(),
            n_groups: dataset.groups().len(),
            n_options,
            n_folds: plan.n_folds,
            n_repetitions: plan.n_repetitions,
            augmentation_seed: aug.seed,
            n_permutations: aug.n_permutations,
            grid_candidates: grid.candidates.len(),
            inner_folds: grid.inner_folds,
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn predict_fold(
    variant: &VariantSpec,
    profiles: &[GroupProfile],
    choices: &[usize],
    plan: &FoldPlan,
    rep: usize,
    fold: usize,
    aug: &AugmentationSpec,
    grid: &GridSearchSpec,
    n_options: usize,
) -> Result<Vec<(usize, usize)>, EvalError> {
    let test_idx = plan.test_indices(rep, fold);
    match variant.model {
        ModelKind::Pacp => Ok(test_idx
            .into_iter()
            .map(|i| {
                let seed = derive_seed(plan.seed, &[PACP_TIE_STREAM, rep as u64, i as u64]);
                (i, pacp_predict(&profiles[i], seed).predicted_option)
            })
            .collect()),
        ModelKind::Lcp => {
            let labeled = |i: usize| LabeledGroup::observed(&profiles[i], choices[i]);
            let mut train = FoldSet::new(
                FoldRole::Train,
                (0..profiles.len())
                    .filter(|&i| plan.assignments[rep][i] != fold)
                    .map(labeled)
                    .collect(),
            );
            let test = FoldSet::new(FoldRole::Test, test_idx.iter().map(|&i| labeled(i)).collect());
            let fold_aug = AugmentationSpec {
                seed: derive_seed(aug.seed, &[rep as u64, fold as u64]),
                ..aug.clone()
            };
            train.augment(variant.augmentation, &fold_aug, n_options)?;
            test.ensure_genuine()?;
            let grid_seed = derive_seed(plan.seed, &[GRID_STREAM, rep as u64, fold as u64]);
            let predictor = LcpPredictor::fit(train.items(), grid, grid_seed)?;
            test_idx
                .into_iter()
                .map(|i| Ok((i, predictor.predict(&profiles[i])?.predicted_option)))
                .collect()
        }
    }
}

/// LCP vs PACP per strategy, and each augmented LCP vs plain LCP.
fn significance_pairs(results: &[VariantResult]) -> Vec<Significance> {
    let find = |spec: VariantSpec| results.iter().find(|r| r.spec() == spec);
    let mut out = Vec::new();
    for r in results {
        let spec = r.spec();
        let baseline = match (spec.model, spec.augmentation) {
            (ModelKind::Pacp, _) => continue,
            (ModelKind::Lcp, AugmentationKind::None) => VariantSpec::pacp(spec.strategy),
            (ModelKind::Lcp, _) => VariantSpec::lcp(spec.strategy, AugmentationKind::None),
        };
        if let Some(b) = find(baseline) {
            let p = wilcoxon_signed_rank(&r.rep_accuracies, &b.rep_accuracies, Alternative::Greater)
                .ok()
                .map(|w| w.p_value);
            out.push(Significance {
                a: spec.to_string(),
                b: baseline.to_string(),
                p,
            });
        }
    }
    out
}
