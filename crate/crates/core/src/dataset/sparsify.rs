use rand::Rng;

use super::{DatasetError, Group, RatingMatrix};
use crate::seeds::rng_for;

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyOutcome {
    pub matrix: RatingMatrix,
    pub removed: usize,
    /// Known ratings before removal.
    pub total: usize,
}

impl SparsifyOutcome {
    /// Fraction of the originally known ratings that were removed.
    pub fn achieved_sparsity(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.removed as f64 / self.total as f64
        }
    }
}

/// Removes each known rating independently with probability `p`.
///
/// A removal is skipped when it would leave some option without any rating
/// inside the rater's group. Ratings are visited user by user, option by
/// option, and one uniform draw is consumed per known rating.
pub fn sparsify(m: &RatingMatrix, groups: &[Group], p: f64, seed: u64) -> Result<SparsifyOutcome, DatasetError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(DatasetError::InvalidSpec(format!(
            "removal probability {p} outside [0, 1]"
        )));
    }
    let n = m.n_options();
    let mut group_of = vec![None; m.n_users()];
    let mut raters = vec![vec![0usize; n]; groups.len()];
    for (g, group) in groups.iter().enumerate() {
        for &u in group.members() {
            if u < m.n_users() {
                group_of[u] = Some(g);
                for (o, count) in raters[g].iter_mut().enumerate() {
                    if m.get(u, o).is_some() {
                        *count += 1;
                    }
                }
            }
        }
    }

    let mut rng = rng_for(seed, &[]);
    let mut out = m.clone();
    let mut removed = 0;
    let mut total = 0;
    for u in 0..m.n_users() {
        for o in 0..n {
            if m.get(u, o).is_none() {
                continue;
            }
            total += 1;
            if rng.random::<f64>() >= p {
                continue;
            }
            if let Some(g) = group_of[u] {
                if raters[g][o] <= 1 {
                    continue;
                }
                raters[g][o] -= 1;
            }
            out.set(u, o, None)?;
            removed += 1;
        }
    }
    Ok(SparsifyOutcome {
        matrix: out,
        removed,
        total,
    })
}
