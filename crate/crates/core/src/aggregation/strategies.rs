use super::StrategyKind;
use crate::dataset::{Group, RatingMatrix};

/// Pairwise majority matrix. `entry(i, j)` is `+1` when more members rate `j`
/// above `i` than the other way round, `-1` in the opposite case and `0` on a tie.
/// Only members that rated both options are counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopelandMatrix {
    n: usize,
    entries: Vec<i8>,
}

impl CopelandMatrix {
    pub fn n_options(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    /// Column sums: the raw Copeland score of each option.
    pub fn scores(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| f64::from(self.entry(i, j))).sum())
            .collect()
    }
}

pub fn copeland_matrix(ratings: &RatingMatrix, group: &Group) -> CopelandMatrix {
    copeland_for_members(ratings, group.members())
}

fn copeland_for_members(ratings: &RatingMatrix, members: &[usize]) -> CopelandMatrix {
    let n = ratings.n_options();
    let mut entries = vec![0i8; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (mut prefer_j, mut prefer_i) = (0usize, 0usize);
            for &u in members {
                if let (Some(ri), Some(rj)) = (ratings.get(u, i), ratings.get(u, j)) {
                    if ri < rj {
                        prefer_j += 1;
                    } else if ri > rj {
                        prefer_i += 1;
                    }
                }
            }
            let e = match prefer_j.cmp(&prefer_i) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => 0,
            };
            entries[i * n + j] = e;
            entries[j * n + i] = -e;
        }
    }
    CopelandMatrix { n, entries }
}

/// The member's rated options, best first. Equal ratings keep ascending option order.
fn ranked_options(row: &[Option<f64>]) -> Vec<(usize, f64)> {
    let mut rated: Vec<(usize, f64)> = row.iter().enumerate().filter_map(|(o, r)| r.map(|r| (o, r))).collect();
    rated.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    rated
}

/// Per-option scores before normalization (and before the Copeland shift).
pub fn raw_scores(ratings: &RatingMatrix, members: &[usize], strategy: StrategyKind) -> Vec<f64> {
    let n = ratings.n_options();
    let column = |o: usize| members.iter().filter_map(move |&u| ratings.get(u, o));
    match strategy {
        StrategyKind::Ave => (0..n)
            .map(|o| {
                let (sum, count) = column(o).fold((0.0, 0usize), |(s, c), r| (s + r, c + 1));
                if count == 0 {
                    0.0
                } else {
                    sum / count as f64
                }
            })
            .collect(),
        StrategyKind::Mult => (0..n).map(|o| column(o).reduce(|a, b| a * b).unwrap_or(0.0)).collect(),
        StrategyKind::Lm => (0..n).map(|o| column(o).reduce(f64::min).unwrap_or(0.0)).collect(),
        StrategyKind::Mpl => (0..n).map(|o| column(o).reduce(f64::max).unwrap_or(0.0)).collect(),
        StrategyKind::Sds1 => top_k_counts(ratings, members, 1),
        StrategyKind::Sds3 => top_k_counts(ratings, members, 3),
        StrategyKind::Cope => copeland_for_members(ratings, members).scores(),
        StrategyKind::Borda => borda(ratings, members),
    }
}

fn top_k_counts(ratings: &RatingMatrix, members: &[usize], k: usize) -> Vec<f64> {
    let mut counts = vec![0.0; ratings.n_options()];
    for &u in members {
        for (o, _) in ranked_options(ratings.row(u)).into_iter().take(k) {
            counts[o] += 1.0;
        }
    }
    counts
}

/// Each member gives `k-1, ..., 0` points over their `k` rated options; equal
/// ratings share the mean of the points of the positions they occupy.
fn borda(ratings: &RatingMatrix, members: &[usize]) -> Vec<f64> {
    let mut points = vec![0.0; ratings.n_options()];
    for &u in members {
        let ranked = ranked_options(ratings.row(u));
        let k = ranked.len();
        let mut start = 0;
        while start < k {
            let mut end = start + 1;
            while end < k && ranked[end].1 == ranked[start].1 {
                end += 1;
            }
            // positions start..end hold points k-1-start down to k-end
            let shared = (2 * k - 1 - start - end) as f64 / 2.0;
            for &(o, _) in &ranked[start..end] {
                points[o] += shared;
            }
            start = end;
        }
    }
    points
}
