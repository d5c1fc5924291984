//! Seeded synthetic datasets with a known choice mechanism.
//!
//! Each group draws a latent preference vector from a flat Dirichlet. Every
//! member rates `latent + uniform noise`, min-max rescaled to the 1..=10 scale.
//! The recorded choice follows [`SchemeKind`].

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::{Dataset, DatasetError, Group, RatingMatrix};
use crate::seeds::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// With probability `1 - tau` the argmax of the members' average ratings,
    /// otherwise uniform among the `top_k` best options by average rating.
    ArgmaxAverageWithNoise,
    /// Uniform over all options, ignoring the ratings.
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticSchemeSpec {
    pub kind: SchemeKind,
    pub tau: f64,
    pub top_k: usize,
    pub min_group_size: usize,
    pub max_group_size: usize,
    /// Half-width of the uniform per-member noise, in latent units (latent entries lie in 0..=1).
    pub rating_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSchemeSpec {
    fn default() -> Self {
        Self {
            kind: SchemeKind::ArgmaxAverageWithNoise,
            tau: 0.0,
            top_k: 3,
            min_group_size: 2,
            max_group_size: 5,
            rating_noise: 0.15,
            seed: 0,
        }
    }
}

impl SyntheticSchemeSpec {
    fn validate(&self, n_options: usize) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidSpec(m));
        if !(0.0..=1.0).contains(&self.tau) {
            return bad(format!("tau {} outside [0, 1]", self.tau));
        }
        if self.top_k == 0 || self.top_k > n_options {
            return bad(format!("top_k {} must be in 1..={n_options}", self.top_k));
        }
        if self.min_group_size < 2 || self.min_group_size > self.max_group_size {
            return bad(format!(
                "group size range {}..={} must start at 2 or more and be non-empty",
                self.min_group_size, self.max_group_size
            ));
        }
        if !self.rating_noise.is_finite() || self.rating_noise < 0.0 {
            return bad(format!("rating noise {} must be >= 0", self.rating_noise));
        }
        Ok(())
    }
}

// Averages closer than this are redrawn so the argmax is unambiguous.
const MIN_TOP_GAP: f64 = 1e-6;

pub fn generate_synthetic(
    spec: &SyntheticSchemeSpec,
    n_groups: usize,
    n_options: usize,
) -> Result<Dataset, DatasetError> {
    if n_groups == 0 {
        return Err(DatasetError::InvalidSpec("n_groups must be positive".into()));
    }
    if n_options < 2 {
        return Err(DatasetError::InvalidSpec("need at least two options".into()));
    }
    spec.validate(n_options)?;

    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut groups = Vec::with_capacity(n_groups);
    let mut choices = Vec::with_capacity(n_groups);
    for g in 0..n_groups {
        let mut rng = rng_for(spec.seed, &[g as u64]);
        let size = rng.random_range(spec.min_group_size..=spec.max_group_size);
        let (member_rows, order) = loop {
            let member_rows = draw_group(&mut rng, size, n_options, spec.rating_noise);
            let order = options_by_average(&member_rows, n_options);
            let means = column_means(&member_rows, n_options);
            if means[order[0]] - means[order[1]] > MIN_TOP_GAP {
                break (member_rows, order);
            }
        };
        let choice = match spec.kind {
            SchemeKind::UniformRandom => rng.random_range(0..n_options),
            SchemeKind::ArgmaxAverageWithNoise => {
                if rng.random::<f64>() < spec.tau {
                    order[rng.random_range(0..spec.top_k)]
                } else {
                    order[0]
                }
            }
        };
        let first = rows.len();
        rows.extend(member_rows.into_iter().map(|r| r.into_iter().map(Some).collect()));
        groups.push(Group::new(format!("g{}", g + 1), (first..rows.len()).collect())?);
        choices.push(choice);
    }
    let user_ids = (1..=rows.len()).map(|u| format!("u{u}")).collect();
    let ratings = RatingMatrix::from_rows(rows, n_options)?;
    Dataset::new(ratings, groups, choices, user_ids)
}

fn draw_group(rng: &mut ChaCha8Rng, size: usize, n_options: usize, noise: f64) -> Vec<Vec<f64>> {
    let raw: Vec<f64> = (0..n_options).map(|_| Exp1.sample(rng)).collect();
    let max = raw.iter().copied().fold(f64::MIN, f64::max);
    let latent: Vec<f64> = raw.iter().map(|v| v / max).collect();
    (0..size)
        .map(|_| {
            let noisy: Vec<f64> = latent
                .iter()
                .map(|l| {
                    l + if noise > 0.0 {
                        rng.random_range(-noise..=noise)
                    } else {
                        0.0
                    }
                })
                .collect();
            rescale(&noisy)
        })
        .collect()
}

fn rescale(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::MAX, f64::min);
    let hi = values.iter().copied().fold(f64::MIN, f64::max);
    if hi - lo <= f64::EPSILON {
        return vec![5.5; values.len()];
    }
    values
        .iter()
        .map(|v| (1.0 + 9.0 * (v - lo) / (hi - lo)).clamp(1.0, 10.0))
        .collect()
}

fn column_means(rows: &[Vec<f64>], n_options: usize) -> Vec<f64> {
    (0..n_options)
        .map(|o| rows.iter().map(|r| r[o]).sum::<f64>() / rows.len() as f64)
        .collect()
}

/// Options sorted by average rating, best first; ties by ascending index.
fn options_by_average(rows: &[Vec<f64>], n_options: usize) -> Vec<usize> {
    let means = column_means(rows, n_options);
    let mut order: Vec<usize> = (0..n_options).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    order
}
