//! Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped and tied absolute differences share the mean
//! of their ranks. Up to [`EXACT_MAX_PAIRS`] non-zero pairs the p-value comes
//! from the exact sign-flip distribution of the (possibly tied) ranks; above
//! that a continuity-corrected normal approximation with tie correction is used.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

pub const EXACT_MAX_PAIRS: usize = 25;
const MIN_PAIRS: usize = 5;
// Relative tolerance for treating two absolute differences as tied.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum WilcoxonError {
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {MIN_PAIRS} pairs, got {0}")]
    TooFewPairs(usize),
    #[error("all paired differences are zero")]
    AllZero,
    #[error("non-finite sample value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    /// `a` tends to be larger than `b`.
    Greater,
    Less,
    TwoSided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    /// Sum of the ranks of the positive differences.
    pub w_plus: f64,
    /// Pairs left after dropping zero differences.
    pub n_used: usize,
    pub p_value: f64,
    pub exact: bool,
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alternative: Alternative) -> Result<WilcoxonResult, WilcoxonError> {
    if a.len() != b.len() {
        return Err(WilcoxonError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < MIN_PAIRS {
        return Err(WilcoxonError::TooFewPairs(a.len()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(WilcoxonError::NonFinite);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(WilcoxonError::AllZero);
    }
    let ranks = signed_ranks(&diffs);
    let n = diffs.len();
    let w_plus: f64 = ranks.iter().filter(|(_, pos)| *pos).map(|(r, _)| r).sum();

    let (p_greater, p_less, exact) = if n <= EXACT_MAX_PAIRS {
        let (g, l) = exact_tails(&ranks);
        (g, l, true)
    } else {
        let (g, l) = normal_tails(&ranks, w_plus);
        (g, l, false)
    };
    let p_value = match alternative {
        Alternative::Greater => p_greater,
        Alternative::Less => p_less,
        Alternative::TwoSided => (2.0 * p_greater.min(p_less)).min(1.0),
    };
    Ok(WilcoxonResult {
        w_plus,
        n_used: n,
        p_value,
        exact,
    })
}

/// `(rank of |d|, d > 0)` for every difference, with mid-ranks for ties.
fn signed_ranks(diffs: &[f64]) -> Vec<(f64, bool)> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0.0; diffs.len()];
    let mut start = 0;
    while start < order.len() {
        let base = diffs[order[start]].abs();
        let mut end = start + 1;
        while end < order.len() && diffs[order[end]].abs() - base <= TIE_TOLERANCE * base {
            end += 1;
        }
        // positions start..end share ranks start+1 ..= end
        let mid = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mid;
        }
        start = end;
    }
    diffs.iter().zip(ranks).map(|(d, r)| (r, *d > 0.0)).collect()
}

/// Exact `P(W+ >= w)` and `P(W+ <= w)` over the 2^n equally likely sign patterns.
fn exact_tails(ranks: &[(f64, bool)]) -> (f64, f64) {
    // mid-ranks are multiples of 1/2, so doubled ranks are integers
    let doubled: Vec<usize> = ranks.iter().map(|(r, _)| (2.0 * r).round() as usize).collect();
    let observed: usize = ranks
        .iter()
        .zip(&doubled)
        .filter(|((_, pos), _)| *pos)
        .map(|(_, d)| d)
        .sum();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &d in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + d] += counts[s];
            }
        }
        reach += d;
    }
    let total = 2f64.powi(ranks.len() as i32);
    let upper: f64 = counts[observed..].iter().sum();
    let lower: f64 = counts[..=observed].iter().sum();
    (upper / total, lower / total)
}

fn normal_tails(ranks: &[(f64, bool)], w_plus: f64) -> (f64, f64) {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted: Vec<f64> = ranks.iter().map(|(r, _)| *r).collect();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let sd = var.sqrt();
    let normal = Normal::standard();
    let greater = normal.sf((w_plus - mean - 0.5) / sd);
    let less = normal.cdf((w_plus - mean + 0.5) / sd);
    (greater.min(1.0), less.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_positive_differences() {
        let a = [0.5, 0.6, 0.7, 0.8, 0.9];
        let b = [0.4, 0.4, 0.4, 0.4, 0.4];
        let r = wilcoxon_signed_rank(&a, &b, Alternative::Greater).unwrap();
        assert_eq!(r.p_value, 0.03125);
        assert_eq!(r.w_plus, 15.0);
        assert!(r.exact);
    }

    #[test]
    fn error_cases() {
        let a = [0.1; 6];
        assert_eq!(
            wilcoxon_signed_rank(&a, &a, Alternative::Greater),
            Err(WilcoxonError::AllZero)
        );
        assert_eq!(
            wilcoxon_signed_rank(&a[..4], &a[..4], Alternative::Greater),
            Err(WilcoxonError::TooFewPairs(4))
        );
        assert_eq!(
            wilcoxon_signed_rank(&a, &a[..5], Alternative::Greater),
            Err(WilcoxonError::LengthMismatch(6, 5))
        );
    }

    #[test]
    fn tied_ranks_are_averaged() {
        let r = signed_ranks(&[1.0, -1.0, 2.0, 0.5]);
        assert_eq!(r, vec![(2.5, true), (2.5, false), (4.0, true), (1.0, true)]);
    }

    #[test]
    fn normal_approximation_for_many_pairs() {
        let a: Vec<f64> = (0..40).map(|i| i as f64 * 0.1 + 1.0).collect();
        let b: Vec<f64> = (0..40)
            .map(|i| i as f64 * 0.1 + if i % 4 == 0 { 1.5 } else { 0.5 })
            .collect();
        let r = wilcoxon_signed_rank(&a, &b, Alternative::Greater).unwrap();
        assert!(!r.exact);
        assert!(r.p_value < 0.05);
        let two = wilcoxon_signed_rank(&a, &b, Alternative::TwoSided).unwrap();
        assert!((two.p_value - 2.0 * r.p_value).abs() < 1e-12);
    }
}
