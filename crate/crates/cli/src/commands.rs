//! Drivers behind the `ingest`, `synth`, `profiles`, `eval` and `sparsity` subcommands.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use groupchoice::aggregation::write_profiles_csv;
use groupchoice::dataset::{generate_synthetic, ingest_with_scale, square_ratings, write_csvs, RatingScale};
use groupchoice::evalharness::{
    make_fold_plan, sparsity_sweep, write_accuracy_csv, write_confusion_csv, write_predictions_csv, write_sparsity_csv,
    SparsityPoint,
};
use groupchoice::{aggregate, evaluate, Dataset, EvalReport, StrategyKind};
use serde::Serialize;

use crate::config::{ResolvedSeeds, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Loads the configured dataset exactly as stored on disk.
pub fn load_raw(cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let (r, g, c) = cfg.data.paths()?;
    let scale = RatingScale {
        min: cfg.data.rating_min,
        max: cfg.data.rating_max,
    };
    ingest_with_scale(&r, &g, &c, scale).with_context(|| format!("loading dataset from {}", r.display()))
}

/// The dataset used for modelling: raw ratings, squared when configured.
pub fn load_dataset(cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let ds = load_raw(cfg)?;
    if cfg.data.square_ratings {
        let squared = square_ratings(ds.ratings());
        return Ok(ds.with_ratings(squared)?);
    }
    Ok(ds)
}

fn out_file(dir: &Path, name: &str) -> anyhow::Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(f)))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[derive(Debug, Serialize)]
pub struct DatasetSummary {
    pub version: &'static str,
    pub n_users: usize,
    pub n_groups: usize,
    pub n_options: usize,
    pub known_ratings: usize,
    /// `group_sizes[s]` groups have `s` members.
    pub group_sizes: Vec<usize>,
    /// How often each option (1-based position) was chosen.
    pub choice_counts: Vec<usize>,
}

pub fn summarize(ds: &Dataset) -> DatasetSummary {
    let max_size = ds.groups().iter().map(|g| g.len()).max().unwrap_or(0);
    let mut group_sizes = vec![0; max_size + 1];
    for g in ds.groups() {
        group_sizes[g.len()] += 1;
    }
    let mut choice_counts = vec![0; ds.n_options()];
    for &c in ds.choices() {
        choice_counts[c] += 1;
    }
    DatasetSummary {
        version: VERSION,
        n_users: ds.ratings().n_users(),
        n_groups: ds.groups().len(),
        n_options: ds.n_options(),
        known_ratings: ds.ratings().n_known(),
        group_sizes,
        choice_counts,
    }
}

/// Validates the dataset and writes `dataset.json`.
pub fn cmd_ingest(cfg: &RunConfig) -> anyhow::Result<DatasetSummary> {
    let ds = load_raw(cfg)?;
    let summary = summarize(&ds);
    let path = write_json(&cfg.output.dir, "dataset.json", &summary)?;
    tracing::info!(groups = summary.n_groups, users = summary.n_users, path = %path.display(), "dataset is valid");
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct SynthRecord<'a> {
    version: &'static str,
    seeds: ResolvedSeeds,
    n_groups: usize,
    n_options: usize,
    spec: &'a groupchoice::dataset::SyntheticSchemeSpec,
}

/// Generates a synthetic dataset into the output directory.
pub fn cmd_synth(cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let spec = cfg.synthetic_spec();
    let ds = generate_synthetic(&spec, cfg.synth.n_groups, cfg.synth.n_options)?;
    write_csvs(&ds, &cfg.output.dir)?;
    write_json(
        &cfg.output.dir,
        "synth.json",
        &SynthRecord {
            version: VERSION,
            seeds: cfg.seeds(),
            n_groups: cfg.synth.n_groups,
            n_options: cfg.synth.n_options,
            spec: &spec,
        },
    )?;
    tracing::info!(groups = cfg.synth.n_groups, seed = spec.seed, dir = %cfg.output.dir.display(), "synthetic dataset written");
    Ok(ds)
}

/// Writes `profiles.csv` with one row per group and strategy.
pub fn cmd_profiles(cfg: &RunConfig, strategies: &[StrategyKind]) -> anyhow::Result<PathBuf> {
    let ds = load_dataset(cfg)?;
    let strategies = if strategies.is_empty() {
        cfg.eval.strategies.as_slice()
    } else {
        strategies
    };
    let mut profiles = Vec::new();
    for &s in strategies {
        for g in ds.groups() {
            profiles.push(aggregate(ds.ratings(), g, s)?);
        }
    }
    let (path, w) = out_file(&cfg.output.dir, "profiles.csv")?;
    write_profiles_csv(&profiles, w)?;
    tracing::info!(path = %path.display(), rows = profiles.len(), "profiles written");
    Ok(path)
}

#[derive(Debug, Serialize)]
struct RunRecord<'a> {
    version: &'static str,
    seeds: ResolvedSeeds,
    config: &'a RunConfig,
}

/// Runs the cross-validated evaluation and writes the report and CSVs.
pub fn cmd_eval(cfg: &RunConfig) -> anyhow::Result<EvalReport> {
    let ds = load_dataset(cfg)?;
    let seeds = cfg.seeds();
    let variants = cfg.eval.variant_specs()?;
    let plan = make_fold_plan(ds.groups(), cfg.eval.folds, cfg.eval.repetitions, seeds.plan)?;
    let grid = cfg.grid.spec();
    tracing::info!(
        variants = variants.len(),
        folds = plan.n_folds,
        repetitions = plan.n_repetitions,
        plan_seed = seeds.plan,
        augmentation_seed = seeds.augmentation,
        "evaluating"
    );
    let report = evaluate(&ds, &variants, &plan, &cfg.augmentation_spec(), &grid)?;

    let dir = &cfg.output.dir;
    write_json(dir, "report.json", &report)?;
    write_json(dir, "fold_plan.json", &plan)?;
    write_json(
        dir,
        "run.json",
        &RunRecord {
            version: VERSION,
            seeds,
            config: cfg,
        },
    )?;
    write_accuracy_csv(&report, out_file(dir, "accuracy.csv")?.1)?;
    write_confusion_csv(&report, out_file(dir, "confusion.csv")?.1)?;
    write_predictions_csv(&report, &ds, out_file(dir, "predictions.csv")?.1)?;
    for v in &report.variants {
        tracing::info!(variant = %v.spec(), accuracy = v.mean_accuracy, kl = v.kl, "result");
    }
    Ok(report)
}

#[derive(Debug, Serialize)]
struct SparsityRecord<'a> {
    version: &'static str,
    seeds: ResolvedSeeds,
    strategy: StrategyKind,
    points: &'a [SparsityPoint],
}

/// Runs the sparsity sweep and writes `sparsity.csv` and `sparsity.json`.
pub fn cmd_sparsity(cfg: &RunConfig) -> anyhow::Result<Vec<SparsityPoint>> {
    let ds = load_dataset(cfg)?;
    let seeds = cfg.seeds();
    let plan = make_fold_plan(ds.groups(), cfg.eval.folds, cfg.eval.repetitions, seeds.plan)?;
    let spec = cfg.sparsity_spec();
    let points = sparsity_sweep(&ds, &spec, &plan, &cfg.augmentation_spec(), &cfg.grid.spec())?;
    let dir = &cfg.output.dir;
    write_sparsity_csv(&points, spec.strategy, out_file(dir, "sparsity.csv")?.1)?;
    write_json(
        dir,
        "sparsity.json",
        &SparsityRecord {
            version: VERSION,
            seeds,
            strategy: spec.strategy,
            points: &points,
        },
    )?;
    Ok(points)
}
