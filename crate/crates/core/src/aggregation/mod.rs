//! Group profiles: per-option group scores aggregated from member ratings and
//! normalized to sum to one.
//!
//! Every strategy only looks at the ratings that are known. An option that no
//! member rated gets a raw score of zero.

mod strategies;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Group, RatingMatrix};

pub use strategies::{copeland_matrix, raw_scores, CopelandMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum AggregationError {
    #[error("unknown aggregation strategy `{0}`")]
    UnknownStrategy(String),
    #[error("group {0} has no members")]
    EmptyGroup(String),
    #[error("group {group} references user {user} outside the rating matrix")]
    UnknownMember { group: String, user: usize },
    #[error("cannot normalize: entry {index} is {value}")]
    InvalidScore { index: usize, value: f64 },
    #[error("cannot normalize an empty score vector")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StrategyKind {
    /// Mean of the known ratings.
    Ave,
    /// Product of the known ratings.
    Mult,
    /// Least misery: minimum known rating.
    Lm,
    /// Number of members whose favourite option it is.
    Sds1,
    /// Number of members that have it among their three favourites.
    Sds3,
    /// Copeland score (pairwise majority wins minus losses), shifted to be non-negative.
    Cope,
    /// Borda points with averaged points for tied ratings.
    Borda,
    /// Most pleasure: maximum known rating.
    Mpl,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 8] = [
        StrategyKind::Ave,
        StrategyKind::Mult,
        StrategyKind::Lm,
        StrategyKind::Sds1,
        StrategyKind::Sds3,
        StrategyKind::Cope,
        StrategyKind::Borda,
        StrategyKind::Mpl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Ave => "AVE",
            StrategyKind::Mult => "MULT",
            StrategyKind::Lm => "LM",
            StrategyKind::Sds1 => "SDS1",
            StrategyKind::Sds3 => "SDS3",
            StrategyKind::Cope => "COPE",
            StrategyKind::Borda => "BORDA",
            StrategyKind::Mpl => "MPL",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = AggregationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| AggregationError::UnknownStrategy(s.to_owned()))
    }
}

/// Normalized per-option group scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupProfile {
    pub group_id: String,
    pub strategy: StrategyKind,
    pub scores: Vec<f64>,
}

/// Divides each entry by the total. An all-zero vector becomes uniform.
pub fn normalize(raw: &[f64]) -> Result<Vec<f64>, AggregationError> {
    if raw.is_empty() {
        return Err(AggregationError::Empty);
    }
    if let Some((index, &value)) = raw.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(AggregationError::InvalidScore { index, value });
    }
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        return Ok(vec![1.0 / raw.len() as f64; raw.len()]);
    }
    Ok(raw.iter().map(|v| v / total).collect())
}

/// Builds the normalized profile of `group` under `strategy`.
///
/// Copeland scores sum to zero and can be negative, so they are shifted by
/// their minimum before normalization.
pub fn aggregate(
    ratings: &RatingMatrix,
    group: &Group,
    strategy: StrategyKind,
) -> Result<GroupProfile, AggregationError> {
    if group.is_empty() {
        return Err(AggregationError::EmptyGroup(group.id.clone()));
    }
    if let Some(&user) = group.members().iter().find(|&&u| u >= ratings.n_users()) {
        return Err(AggregationError::UnknownMember {
            group: group.id.clone(),
            user,
        });
    }
    let mut raw = raw_scores(ratings, group.members(), strategy);
    if strategy == StrategyKind::Cope {
        let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
        raw.iter_mut().for_each(|v| *v -= min);
    }
    Ok(GroupProfile {
        group_id: group.id.clone(),
        strategy,
        scores: normalize(&raw)?,
    })
}

/// Writes `group_id,strategy,score_1,...,score_n` rows. Scores use the shortest
/// representation that round-trips.
pub fn write_profiles_csv<W: Write>(profiles: &[GroupProfile], mut out: W) -> std::io::Result<()> {
    let n = profiles.first().map_or(0, |p| p.scores.len());
    write!(out, "group_id,strategy")?;
    for j in 1..=n {
        write!(out, ",score_{j}")?;
    }
    writeln!(out)?;
    for p in profiles {
        write!(out, "{},{}", p.group_id, p.strategy)?;
        for s in &p.scores {
            write!(out, ",{s}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_round_trip() {
        for k in StrategyKind::ALL {
            assert_eq!(k.as_str().parse::<StrategyKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
        }
        assert_eq!(
            "ave".parse::<StrategyKind>(),
            Err(AggregationError::UnknownStrategy("ave".into()))
        );
    }

    #[test]
    fn normalize_column_means_of_the_worked_example() {
        let means = [5.0, 8.25, 3.5, 5.75, 4.25, 5.75, 6.25, 4.5, 7.75, 4.0];
        let expected = [0.09, 0.15, 0.06, 0.10, 0.07, 0.10, 0.11, 0.08, 0.14, 0.07];
        let got = normalize(&means).unwrap();
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() <= 0.01, "{g} vs {e}");
        }
        assert_eq!(got[1], 8.25 / 55.0);
    }

    #[test]
    fn normalize_degenerate_and_idempotent() {
        assert_eq!(normalize(&[0.0; 10]).unwrap(), vec![0.1; 10]);
        let once = normalize(&[1.0, 3.0, 4.0]).unwrap();
        assert_eq!(normalize(&once).unwrap(), once);
        assert!(matches!(
            normalize(&[1.0, -0.5]),
            Err(AggregationError::InvalidScore { index: 1, .. })
        ));
        assert!(normalize(&[f64::NAN]).is_err());
        assert_eq!(normalize(&[]), Err(AggregationError::Empty));
    }

    #[test]
    fn single_member_average_is_the_normalized_row() {
        let m = RatingMatrix::dense(&[[2.0, 6.0, 2.0]]).unwrap();
        let g = Group::new("solo", vec![0]).unwrap();
        let p = aggregate(&m, &g, StrategyKind::Ave).unwrap();
        assert_eq!(p.scores, vec![0.2, 0.6, 0.2]);
    }

    #[test]
    fn member_outside_matrix_is_an_error() {
        let m = RatingMatrix::dense(&[[2.0, 6.0]]).unwrap();
        let g = Group::new("g", vec![0, 4]).unwrap();
        assert!(matches!(
            aggregate(&m, &g, StrategyKind::Ave),
            Err(AggregationError::UnknownMember { user: 4, .. })
        ));
    }

    #[test]
    fn profiles_csv_layout() {
        let p = GroupProfile {
            group_id: "g1".into(),
            strategy: StrategyKind::Cope,
            scores: vec![0.25, 0.75],
        };
        let mut buf = Vec::new();
        write_profiles_csv(&[p], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "group_id,strategy,score_1,score_2\ng1,COPE,0.25,0.75\n"
        );
    }
}
