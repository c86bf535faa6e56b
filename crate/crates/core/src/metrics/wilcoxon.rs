//! Two-sided Wilcoxon rank-sum (Mann-Whitney U) test.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Combined sample size up to which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumTest {
    /// Mann-Whitney U of the first sample.
    pub statistic: f64,
    /// Sum of the first sample's (average) ranks.
    pub rank_sum: f64,
    pub p_value: f64,
    pub exact: bool,
}

/// Average ranks of the pooled sample, doubled so ties stay integral.
fn doubled_ranks(pooled: &[f64]) -> (Vec<u64>, f64) {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; n];
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && pooled[order[end + 1]] == pooled[order[start]] {
            end += 1;
        }
        // 1-based positions start+1 ..= end+1, average doubled = start + end + 2
        for &i in &order[start..=end] {
            ranks[i] = (start + end + 2) as u64;
        }
        let t = (end - start + 1) as f64;
        tie_term += t * t * t - t;
        start = end + 1;
    }
    (ranks, tie_term)
}

pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<RankSumTest> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "rank-sum test needs at least 3 observations per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = doubled_ranks(&pooled);
    let w2: u64 = ranks[..na].iter().sum();
    let rank_sum = w2 as f64 / 2.0;
    let statistic = rank_sum - (na * (na + 1)) as f64 / 2.0;

    let (p_value, exact) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, na, w2), true)
    } else {
        let mean = (na * nb) as f64 / 2.0;
        let var = (na * nb) as f64 / 12.0
            * ((n + 1) as f64 - tie_term / (n * (n - 1)) as f64);
        let p = if var <= 0.0 {
            1.0
        } else {
            let z = ((statistic - mean).abs() - 0.5).max(0.0) / var.sqrt();
            erfc(z / std::f64::consts::SQRT_2).min(1.0)
        };
        (p, false)
    };
    Ok(RankSumTest {
        statistic,
        rank_sum,
        p_value,
        exact,
    })
}

/// Exact two-sided p from the permutation distribution of the doubled rank sum,
/// counted by dynamic programming over subsets of size `na`.
fn exact_p(ranks: &[u64], na: usize, observed: u64) -> f64 {
    let max_sum: u64 = ranks.iter().sum();
    let width = max_sum as usize + 1;
    // ways[k * width + s]: subsets of size k with doubled rank sum s
    let mut ways = vec![0u64; (na + 1) * width];
    ways[0] = 1;
    for &r in ranks {
        let r = r as usize;
        for k in (1..=na).rev() {
            for s in (r..width).rev() {
                let add = ways[(k - 1) * width + s - r];
                if add != 0 {
                    ways[k * width + s] += add;
                }
            }
        }
    }
    let dist = &ways[na * width..];
    let total: u64 = dist.iter().sum();
    let obs = observed as usize;
    let low: u64 = dist[..=obs].iter().sum();
    let high: u64 = dist[obs..].iter().sum();
    let tail = low.min(high) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}
