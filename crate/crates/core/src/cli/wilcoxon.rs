//! Two-sided Wilcoxon signed-rank test for paired samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

pub const ALPHA: f64 = 0.05;

/// Largest number of nonzero differences tested exactly.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Reject,
    Retain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(w_plus, w_minus)`
    pub statistic: f64,
    pub p_value: f64,
    pub exact: bool,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum WilcoxonOutcome {
    NoNonzeroDifferences,
    Tested(WilcoxonResult),
}

impl WilcoxonOutcome {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            WilcoxonOutcome::Tested(r) => Some(r.p_value),
            WilcoxonOutcome::NoNonzeroDifferences => None,
        }
    }
}

/// Ranks of `values` (1-based), ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Tests whether the differences `x - y` are symmetric about zero.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> WilcoxonOutcome {
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return WilcoxonOutcome::NoNonzeroDifferences;
    }
    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w_plus = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .fold(0.0, |acc, (_, r)| acc + r);
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let exact = n <= EXACT_MAX_N;
    let p = if exact {
        exact_p(&ranks, w_plus)
    } else {
        normal_p(&ranks, w_plus)
    };
    let p_value = p.clamp(0.0, 1.0);
    WilcoxonOutcome::Tested(WilcoxonResult {
        n,
        w_plus,
        w_minus,
        statistic: w_plus.min(w_minus),
        p_value,
        exact,
        decision: if p_value < ALPHA {
            Decision::Reject
        } else {
            Decision::Retain
        },
    })
}

/// Exact two-sided p over all `2^n` sign assignments. Average ranks are
/// multiples of 1/2, so the count runs over doubled rank sums.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = 2f64.powi(ranks.len() as i32);
    let w = (w_plus * 2.0).round() as usize;
    let lower: f64 = counts[..=w].iter().sum::<f64>() / total;
    let upper: f64 = counts[w..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Normal approximation with tie-corrected variance and continuity
/// correction.
fn normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|r| **r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    2.0 * (1.0 - std.cdf(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tested(pairs: &[(f64, f64)]) -> WilcoxonResult {
        match wilcoxon_signed_rank(pairs) {
            WilcoxonOutcome::Tested(r) => r,
            other => panic!("expected a test result, got {other:?}"),
        }
    }

    #[test]
    fn all_positive_five() {
        let pairs: Vec<(f64, f64)> = (1..=5).map(|d| (f64::from(d), 0.0)).collect();
        let r = tested(&pairs);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.w_plus, 15.0);
        assert_eq!(r.p_value, 0.0625);
        assert_eq!(r.decision, Decision::Retain);
    }

    #[test]
    fn symmetric_and_identical() {
        assert_eq!(tested(&[(1.0, 0.0), (0.0, 1.0)]).p_value, 1.0);
        assert_eq!(
            wilcoxon_signed_rank(&[(2.0, 2.0), (3.0, 3.0)]),
            WilcoxonOutcome::NoNonzeroDifferences
        );
    }

    #[test]
    fn ties_get_average_ranks() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }

    #[test]
    fn large_sample_uses_normal_and_rejects_shift() {
        let pairs: Vec<(f64, f64)> = (1..=30).map(|i| (f64::from(i) + 0.5, 0.0)).collect();
        let r = tested(&pairs);
        assert!(!r.exact);
        assert!(r.p_value < 1e-5);
        assert_eq!(r.decision, Decision::Reject);
    }
}
