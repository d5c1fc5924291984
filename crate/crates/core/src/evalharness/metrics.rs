use serde::{Deserialize, Serialize};

use super::EvalError;

/// `counts[actual][predicted]`, accumulated over all repetitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn record(&mut self, actual: usize, predicted: usize) {
        self.counts[actual][predicted] += 1;
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Row sums: how often each option was the actual choice.
    pub fn actual_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Column sums: how often each option was predicted.
    pub fn predicted_totals(&self) -> Vec<u64> {
        (0..self.counts.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub(crate) fn actual_totals_f64(&self) -> Vec<f64> {
        self.actual_totals().into_iter().map(|c| c as f64).collect()
    }

    pub(crate) fn predicted_totals_f64(&self) -> Vec<f64> {
        self.predicted_totals().into_iter().map(|c| c as f64).collect()
    }
}

/// `KL(predicted || actual)` between two count vectors after add-one smoothing.
pub fn kl_divergence(predicted_counts: &[f64], actual_counts: &[f64]) -> Result<f64, EvalError> {
    if predicted_counts.len() != actual_counts.len() {
        return Err(EvalError::Kl(format!(
            "length mismatch: {} vs {}",
            predicted_counts.len(),
            actual_counts.len()
        )));
    }
    if predicted_counts.is_empty() {
        return Err(EvalError::Kl("empty count vectors".into()));
    }
    if predicted_counts
        .iter()
        .chain(actual_counts)
        .any(|c| !c.is_finite() || *c < 0.0)
    {
        return Err(EvalError::Kl("counts must be finite and non-negative".into()));
    }
    let n = predicted_counts.len() as f64;
    let p_total: f64 = predicted_counts.iter().sum::<f64>() + n;
    let q_total: f64 = actual_counts.iter().sum::<f64>() + n;
    let kl = predicted_counts
        .iter()
        .zip(actual_counts)
        .map(|(pc, qc)| {
            let p = (pc + 1.0) / p_total;
            let q = (qc + 1.0) / q_total;
            p * (p / q).ln()
        })
        .sum::<f64>();
    Ok(kl.max(0.0))
}
