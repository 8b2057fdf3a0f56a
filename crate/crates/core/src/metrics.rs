//! Evaluation metrics and the paired timing test.

use serde::Serialize;

use crate::error::{Error, Result};

/// Percent of matching labels.
pub fn accuracy(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::input("prediction and truth lengths differ"));
    }
    if predicted.is_empty() {
        return Err(Error::input("accuracy of an empty set"));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * hits as f64 / predicted.len() as f64)
}

/// Average ranks (1-based) with ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j + 2) as f64 / 2.0; // ranks i+1 ..= j+1
        for &k in &order[i..=j] {
            ranks[k] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// Area under the ROC curve by the rank statistic; tied scores count 0.5.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::input("score and label lengths differ"));
    }
    let n_pos = labels.iter().filter(|&&y| y > 0.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::input("auc needs both classes"));
    }
    let ranks = average_ranks(scores);
    let rank_pos: f64 = ranks.iter().zip(labels).filter(|(_, &y)| y > 0.0).map(|(r, _)| r).sum();
    let u = rank_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Baseline time over screened time.
pub fn speedup_ratio(time_baseline_ms: f64, time_screened_ms: f64) -> Result<f64> {
    if !(time_baseline_ms > 0.0) || !(time_screened_ms > 0.0) {
        return Err(Error::input("speedup ratio needs positive times"));
    }
    Ok(time_baseline_ms / time_screened_ms)
}

/// Φ(z) via the Abramowitz-Stegun 7.1.26 rational erf approximation
/// (absolute error below 1.5e-7, plenty for reporting p-values).
fn normal_cdf(z: f64) -> f64 {
    let x = z / std::f64::consts::SQRT_2;
    let (x, flip) = if x < 0.0 { (-x, true) } else { (x, false) };
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-x * x).exp();
    let erf = if flip { -erf } else { erf };
    0.5 * (1.0 + erf)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    /// Full enumeration of the 2^n sign assignments (n ≤ 20).
    Exact,
    /// Normal approximation of W⁺ (n > 20).
    NormalApprox,
}

/// Wilcoxon signed-rank test of paired times, oriented so that
/// consistently positive differences `a - b` (first sample slower) give a
/// large W⁺ and a small one-sided p.
#[derive(Clone, Debug, Serialize)]
pub struct WilcoxonResult {
    pub w_plus: f64,
    /// Pairs remaining after zero differences are dropped.
    pub n_used: usize,
    pub z: f64,
    pub p_one_sided: f64,
    pub p_two_sided: f64,
    pub method: WilcoxonMethod,
}

const EXACT_LIMIT: usize = 20;

pub fn wilcoxon_signed_rank(times_a: &[f64], times_b: &[f64]) -> Result<WilcoxonResult> {
    if times_a.len() != times_b.len() {
        return Err(Error::input("paired samples must have equal length"));
    }
    let diffs: Vec<f64> = times_a
        .iter()
        .zip(times_b)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(Error::input("all paired differences are zero"));
    }
    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&diffs).filter(|(_, &d)| d > 0.0).map(|(r, _)| r).sum();

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
    let z = (w_plus - mean) / sd;

    let (p_one, p_two, method) = if n <= EXACT_LIMIT {
        // exact null distribution of W⁺ over all sign assignments
        let total = 1u64 << n;
        let mut ge = 0u64;
        let mut le = 0u64;
        for mask in 0..total {
            let mut w = 0.0;
            for (bit, r) in ranks.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    w += r;
                }
            }
            if w >= w_plus - 1e-9 {
                ge += 1;
            }
            if w <= w_plus + 1e-9 {
                le += 1;
            }
        }
        let p_hi = ge as f64 / total as f64;
        let p_lo = le as f64 / total as f64;
        (p_hi, (2.0 * p_hi.min(p_lo)).min(1.0), WilcoxonMethod::Exact)
    } else {
        let p_hi = 1.0 - normal_cdf(z);
        let p_lo = normal_cdf(z);
        (p_hi, (2.0 * p_hi.min(p_lo)).min(1.0), WilcoxonMethod::NormalApprox)
    };

    Ok(WilcoxonResult { w_plus, n_used: n, z, p_one_sided: p_one, p_two_sided: p_two, method })
}
