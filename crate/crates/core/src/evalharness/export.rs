//! Plot-ready CSV files. Options are written 1-based.

use std::io::Write;

use super::{EvalReport, SparsityPoint, StrategyKind};
use crate::dataset::{Dataset, DatasetError};

fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// One row per variant: mean and sample standard deviation over repetitions.
pub fn write_accuracy_csv<W: Write>(report: &EvalReport, w: W) -> Result<(), DatasetError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "variant",
        "model",
        "strategy",
        "augmentation",
        "mean_accuracy",
        "std_accuracy",
    ])?;
    for v in &report.variants {
        let spec = v.spec();
        out.write_record([
            spec.to_string(),
            spec.model_label(),
            v.strategy.to_string(),
            spec.augmentation.to_string(),
            v.mean_accuracy.to_string(),
            std_dev(&v.rep_accuracies).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Long-format confusion counts for every variant.
pub fn write_confusion_csv<W: Write>(report: &EvalReport, w: W) -> Result<(), DatasetError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["variant", "actual_option", "predicted_option", "count"])?;
    for v in &report.variants {
        let name = v.spec().to_string();
        for (a, row) in v.confusion.counts().iter().enumerate() {
            for (p, count) in row.iter().enumerate() {
                out.write_record([
                    name.clone(),
                    (a + 1).to_string(),
                    (p + 1).to_string(),
                    count.to_string(),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Per-group predictions of the first repetition.
pub fn write_predictions_csv<W: Write>(report: &EvalReport, dataset: &Dataset, w: W) -> Result<(), DatasetError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["group_id", "model", "strategy", "predicted_option", "actual_option"])?;
    for v in &report.variants {
        let Some(first) = v.predictions.first() else {
            continue;
        };
        let model = v.spec().model_label();
        for ((group, predicted), actual) in dataset.groups().iter().zip(first).zip(dataset.choices()) {
            out.write_record([
                group.id.clone(),
                model.clone(),
                v.strategy.to_string(),
                (predicted + 1).to_string(),
                (actual + 1).to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_sparsity_csv<W: Write>(
    points: &[SparsityPoint],
    strategy: StrategyKind,
    w: W,
) -> Result<(), DatasetError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["nominal_p", "achieved_sparsity", "model", "strategy", "accuracy"])?;
    for p in points {
        for (model, acc) in [("PACP", p.pacp_accuracy), ("LCP", p.lcp_accuracy)] {
            out.write_record([
                p.nominal_p.to_string(),
                p.achieved_sparsity.to_string(),
                model.to_string(),
                strategy.to_string(),
                acc.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}
