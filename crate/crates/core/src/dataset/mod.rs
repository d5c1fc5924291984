//! Ratings, groups and observed group choices.
//!
//! Options and users are addressed by zero-based indices internally. The CSV
//! formats in [`ingest`] use one-based option ids.

mod ingest;
mod sparsify;
mod synthetic;
mod transform;

use std::collections::HashSet;

use thiserror::Error;

pub use ingest::{ingest, ingest_with_scale, write_csvs, RatingScale};
pub use sparsify::{sparsify, SparsifyOutcome};
pub use synthetic::{generate_synthetic, SchemeKind, SyntheticSchemeSpec};
pub use transform::{ranks_to_ratings, square_ratings, TOP_RANK_RATING};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: u64, message: String },
    #[error("{file}:{line}: rating {value} outside the {min}..={max} scale")]
    Range {
        file: String,
        line: u64,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid dataset: {0}")]
    Validation(String),
    #[error("group {0} has no recorded choice")]
    MissingChoice(String),
    #[error("invalid rating {value} for user {user}, option {option}")]
    InvalidRating { user: usize, option: usize, value: f64 },
    #[error("index out of range: user {user}, option {option} in a {n_users}x{n_options} matrix")]
    OutOfRange {
        user: usize,
        option: usize,
        n_users: usize,
        n_options: usize,
    },
    #[error("invalid generator settings: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Partial `users x options` rating matrix. `None` marks an unknown rating.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    n_users: usize,
    n_options: usize,
    values: Vec<Option<f64>>,
}

impl RatingMatrix {
    /// An all-unknown matrix.
    pub fn new(n_users: usize, n_options: usize) -> Self {
        Self {
            n_users,
            n_options,
            values: vec![None; n_users * n_options],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Option<f64>>>, n_options: usize) -> Result<Self, DatasetError> {
        let mut m = Self::new(rows.len(), n_options);
        for (u, row) in rows.into_iter().enumerate() {
            if row.len() != n_options {
                return Err(DatasetError::Validation(format!(
                    "row {u} has {} entries, expected {n_options}",
                    row.len()
                )));
            }
            for (o, v) in row.into_iter().enumerate() {
                m.set(u, o, v)?;
            }
        }
        Ok(m)
    }

    /// A fully known matrix.
    pub fn dense<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, DatasetError> {
        let n_options = rows.first().map_or(0, |r| r.as_ref().len());
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().copied().map(Some).collect())
                .collect(),
            n_options,
        )
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_options(&self) -> usize {
        self.n_options
    }

    pub fn get(&self, user: usize, option: usize) -> Option<f64> {
        if user >= self.n_users || option >= self.n_options {
            return None;
        }
        self.values[user * self.n_options + option]
    }

    pub fn set(&mut self, user: usize, option: usize, value: Option<f64>) -> Result<(), DatasetError> {
        if user >= self.n_users || option >= self.n_options {
            return Err(DatasetError::OutOfRange {
                user,
                option,
                n_users: self.n_users,
                n_options: self.n_options,
            });
        }
        if let Some(v) = value {
            if !v.is_finite() || v < 0.0 {
                return Err(DatasetError::InvalidRating { user, option, value: v });
            }
        }
        self.values[user * self.n_options + option] = value;
        Ok(())
    }

    pub fn row(&self, user: usize) -> &[Option<f64>] {
        &self.values[user * self.n_options..(user + 1) * self.n_options]
    }

    /// Number of known ratings.
    pub fn n_known(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Applies `f` to every known rating. `f` must keep ratings non-negative.
    pub(crate) fn map_known(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n_users: self.n_users,
            n_options: self.n_options,
            values: self.values.iter().map(|v| v.map(&f)).collect(),
        }
    }
}

/// A set of users that made one joint decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub id: String,
    members: Vec<usize>,
}

impl Group {
    /// Members keep the given order. Empty groups and repeated members are rejected.
    pub fn new(id: impl Into<String>, members: Vec<usize>) -> Result<Self, DatasetError> {
        let id = id.into();
        if members.is_empty() {
            return Err(DatasetError::Validation(format!("group {id} is empty")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = members.iter().find(|m| !seen.insert(**m)) {
            return Err(DatasetError::Validation(format!("group {id} lists user {dup} twice")));
        }
        Ok(Self { id, members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Ratings plus groups and the option each group chose.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    ratings: RatingMatrix,
    groups: Vec<Group>,
    /// `choices[i]` is the option chosen by `groups[i]`.
    choices: Vec<usize>,
    user_ids: Vec<String>,
    pub option_labels: Option<Vec<String>>,
}

impl Dataset {
    /// Validates and assembles a dataset.
    ///
    /// Groups need at least two members, and a user may belong to one group only.
    pub fn new(
        ratings: RatingMatrix,
        groups: Vec<Group>,
        choices: Vec<usize>,
        user_ids: Vec<String>,
    ) -> Result<Self, DatasetError> {
        if choices.len() != groups.len() {
            return Err(DatasetError::Validation(format!(
                "{} groups but {} choices",
                groups.len(),
                choices.len()
            )));
        }
        if user_ids.len() != ratings.n_users() {
            return Err(DatasetError::Validation(format!(
                "{} user ids for {} matrix rows",
                user_ids.len(),
                ratings.n_users()
            )));
        }
        let mut group_ids = HashSet::new();
        let mut owner: Vec<Option<&str>> = vec![None; ratings.n_users()];
        for (group, &choice) in groups.iter().zip(&choices) {
            if !group_ids.insert(group.id.as_str()) {
                return Err(DatasetError::Validation(format!("duplicate group id {}", group.id)));
            }
            if group.len() < 2 {
                return Err(DatasetError::Validation(format!(
                    "group {} has fewer than two members",
                    group.id
                )));
            }
            if choice >= ratings.n_options() {
                return Err(DatasetError::Validation(format!(
                    "group {} chose option {} but there are only {} options",
                    group.id,
                    choice + 1,
                    ratings.n_options()
                )));
            }
            for &m in group.members() {
                match owner.get_mut(m) {
                    None => {
                        return Err(DatasetError::Validation(format!(
                            "group {} references unknown user index {m}",
                            group.id
                        )))
                    }
                    Some(Some(other)) => {
                        return Err(DatasetError::Validation(format!(
                            "user {} belongs to groups {other} and {}",
                            user_ids[m], group.id
                        )))
                    }
                    Some(slot) => *slot = Some(group.id.as_str()),
                }
            }
        }
        Ok(Self {
            ratings,
            groups,
            choices,
            user_ids,
            option_labels: None,
        })
    }

    pub fn ratings(&self) -> &RatingMatrix {
        &self.ratings
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn n_options(&self) -> usize {
        self.ratings.n_options()
    }

    pub fn choice_of(&self, group_id: &str) -> Option<usize> {
        self.group_index(group_id).map(|i| self.choices[i])
    }

    pub fn group_index(&self, group_id: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.id == group_id)
    }

    /// Same groups and choices over a different rating matrix of the same shape.
    pub fn with_ratings(&self, ratings: RatingMatrix) -> Result<Self, DatasetError> {
        if ratings.n_users() != self.ratings.n_users() || ratings.n_options() != self.ratings.n_options() {
            return Err(DatasetError::Validation(
                "replacement rating matrix has a different shape".into(),
            ));
        }
        Ok(Self {
            ratings,
            ..self.clone()
        })
    }
}
