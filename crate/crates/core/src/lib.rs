//! Group choice prediction from the individual ratings of group members.
//!
//! Two predictors are provided:
//!
//! * **PACP** picks the option with the largest score in a group profile built
//!   by a preference aggregation strategy (average, least misery, Copeland, ...).
//! * **LCP** trains a multinomial logistic regression on `(profile, observed choice)`
//!   pairs and predicts the choice of unseen groups.
//!
//! The crate also contains the Winners / Permutations training-set augmentation,
//! a seeded synthetic dataset generator and a repeated k-fold evaluation harness
//! with accuracy, confusion matrix, KL-divergence and Wilcoxon significance.

pub mod aggregation;
pub mod augmentation;
pub mod classifier;
pub mod dataset;
pub mod evalharness;
pub mod prediction;
pub mod seeds;

pub use aggregation::{aggregate, normalize, GroupProfile, StrategyKind};
pub use augmentation::{add_permutations, add_winners, AugmentationSpec};
pub use classifier::{GridSearchSpec, SoftmaxModel, TrainConfig};
pub use dataset::{Dataset, Group, RatingMatrix};
pub use evalharness::{evaluate, EvalReport, FoldPlan, VariantSpec};
pub use prediction::{ChoicePrediction, LabeledGroup, Origin};
