//! CSV ingestion and export.
//!
//! * `ratings.csv`: `user_id,option_id,rating`
//! * `groups.csv`: `group_id,user_id`
//! * `choices.csv`: `group_id,option_id`
//!
//! Option ids are `1..=n` where `n` is the largest option id in the ratings file.
//! User and group ids are opaque tokens; their order of first appearance fixes
//! the internal indices.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use csv::StringRecord;

use super::{Dataset, DatasetError, Group, RatingMatrix};

/// Accepted rating range for ingested files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl Default for RatingScale {
    fn default() -> Self {
        Self { min: 1.0, max: 10.0 }
    }
}

pub fn ingest(
    ratings_csv: impl AsRef<Path>,
    groups_csv: impl AsRef<Path>,
    choices_csv: impl AsRef<Path>,
) -> Result<Dataset, DatasetError> {
    ingest_with_scale(ratings_csv, groups_csv, choices_csv, RatingScale::default())
}

struct CsvRows {
    file: String,
    rows: Vec<(u64, StringRecord)>,
}

impl CsvRows {
    fn read(path: &Path, header: &[&str]) -> Result<Self, DatasetError> {
        let file = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(File::open(path)?);
        let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        if found != header {
            return Err(DatasetError::Parse {
                file,
                line: 1,
                message: format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
            });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| DatasetError::Parse {
                file: file.clone(),
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(DatasetError::Parse {
                    file,
                    line,
                    message: format!("expected {} fields, found {}", header.len(), record.len()),
                });
            }
            rows.push((line, record));
        }
        Ok(Self { file, rows })
    }

    fn parse_err(&self, line: u64, message: impl Into<String>) -> DatasetError {
        DatasetError::Parse {
            file: self.file.clone(),
            line,
            message: message.into(),
        }
    }

    fn option_id(&self, line: u64, field: &str) -> Result<usize, DatasetError> {
        match field.parse::<usize>() {
            Ok(id) if id >= 1 => Ok(id),
            _ => Err(self.parse_err(line, format!("option id `{field}` is not a positive integer"))),
        }
    }
}

/// Reads and validates the three CSV files.
///
/// Duplicate `(user, option)` rows, ratings outside `scale`, groups without a
/// choice and choices naming unknown groups or options are all rejected.
pub fn ingest_with_scale(
    ratings_csv: impl AsRef<Path>,
    groups_csv: impl AsRef<Path>,
    choices_csv: impl AsRef<Path>,
    scale: RatingScale,
) -> Result<Dataset, DatasetError> {
    let ratings = CsvRows::read(ratings_csv.as_ref(), &["user_id", "option_id", "rating"])?;
    let mut user_index: HashMap<String, usize> = HashMap::new();
    let mut user_ids: Vec<String> = Vec::new();
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = HashSet::new();
    let mut n_options = 0;
    for (line, rec) in &ratings.rows {
        let user = rec[0].to_owned();
        if user.is_empty() {
            return Err(ratings.parse_err(*line, "empty user id"));
        }
        let option = ratings.option_id(*line, &rec[1])?;
        let value: f64 = rec[2]
            .parse()
            .map_err(|_| ratings.parse_err(*line, format!("rating `{}` is not a number", &rec[2])))?;
        if !value.is_finite() || value < scale.min || value > scale.max {
            return Err(DatasetError::Range {
                file: ratings.file.clone(),
                line: *line,
                value,
                min: scale.min,
                max: scale.max,
            });
        }
        let next = user_ids.len();
        let u = *user_index.entry(user.clone()).or_insert_with(|| {
            user_ids.push(user.clone());
            next
        });
        if !seen.insert((u, option)) {
            return Err(ratings.parse_err(*line, format!("duplicate rating for user {user}, option {option}")));
        }
        n_options = n_options.max(option);
        cells.push((u, option - 1, value));
    }
    let mut matrix = RatingMatrix::new(user_ids.len(), n_options);
    for (u, o, v) in cells {
        matrix.set(u, o, Some(v))?;
    }

    let groups_rows = CsvRows::read(groups_csv.as_ref(), &["group_id", "user_id"])?;
    let mut group_order: Vec<String> = Vec::new();
    let mut members: HashMap<String, Vec<usize>> = HashMap::new();
    for (line, rec) in &groups_rows.rows {
        let gid = rec[0].to_owned();
        if gid.is_empty() {
            return Err(groups_rows.parse_err(*line, "empty group id"));
        }
        let u = *user_index.get(&rec[1]).ok_or_else(|| {
            DatasetError::Validation(format!(
                "{}:{line}: user {} of group {gid} has no ratings",
                groups_rows.file, &rec[1]
            ))
        })?;
        members
            .entry(gid.clone())
            .or_insert_with(|| {
                group_order.push(gid.clone());
                Vec::new()
            })
            .push(u);
    }
    let groups = group_order
        .iter()
        .map(|gid| Group::new(gid.clone(), members.remove(gid).unwrap_or_default()))
        .collect::<Result<Vec<_>, _>>()?;

    let choice_rows = CsvRows::read(choices_csv.as_ref(), &["group_id", "option_id"])?;
    let mut choice_of: HashMap<String, usize> = HashMap::new();
    for (line, rec) in &choice_rows.rows {
        let gid = rec[0].to_owned();
        let option = choice_rows.option_id(*line, &rec[1])?;
        if !group_order.contains(&gid) {
            return Err(DatasetError::Validation(format!(
                "{}:{line}: choice for unknown group {gid}",
                choice_rows.file
            )));
        }
        if option > n_options {
            return Err(DatasetError::Validation(format!(
                "{}:{line}: group {gid} chose unknown option {option} (options are 1..={n_options})",
                choice_rows.file
            )));
        }
        if choice_of.insert(gid.clone(), option - 1).is_some() {
            return Err(choice_rows.parse_err(*line, format!("second choice for group {gid}")));
        }
    }
    let choices = group_order
        .iter()
        .map(|gid| {
            choice_of
                .get(gid)
                .copied()
                .ok_or_else(|| DatasetError::MissingChoice(gid.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    Dataset::new(matrix, groups, choices, user_ids)
}

/// Writes `ratings.csv`, `groups.csv` and `choices.csv` into `dir`.
pub fn write_csvs(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<(), DatasetError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let m = dataset.ratings();

    let mut out = std::io::BufWriter::new(File::create(dir.join("ratings.csv"))?);
    writeln!(out, "user_id,option_id,rating")?;
    for (u, uid) in dataset.user_ids().iter().enumerate() {
        for o in 0..m.n_options() {
            if let Some(v) = m.get(u, o) {
                writeln!(out, "{uid},{},{v}", o + 1)?;
            }
        }
    }
    out.flush()?;

    let mut out = std::io::BufWriter::new(File::create(dir.join("groups.csv"))?);
    writeln!(out, "group_id,user_id")?;
    for g in dataset.groups() {
        for &u in g.members() {
            writeln!(out, "{},{}", g.id, dataset.user_ids()[u])?;
        }
    }
    out.flush()?;

    let mut out = std::io::BufWriter::new(File::create(dir.join("choices.csv"))?);
    writeln!(out, "group_id,option_id")?;
    for (g, c) in dataset.groups().iter().zip(dataset.choices()) {
        writeln!(out, "{},{}", g.id, c + 1)?;
    }
    out.flush()?;
    Ok(())
}
