//! Nonparametric rank tests.
//!
//! The one-sided Wilcoxon rank-sum test drives the model tournament; the
//! one-sample signed-rank test backs the 0.5 base-line verdicts of the
//! quality analysis. Small inputs use exact enumeration, larger ones the
//! normal approximation with midrank tie correction and continuity
//! correction.

use crate::special::erfc;

use super::CompareError;

/// Total sample size up to which the rank-sum test enumerates exactly.
pub const EXACT_LIMIT: usize = 20;

// Upper-tail standard normal probability P(Z ≥ z).
fn normal_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

// Midranks of the pooled values; returns (ranks aligned with input order,
// tie group sizes).
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].partial_cmp(&pooled[j]).unwrap());
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0; // average of ranks i+1..=j
        for &index in &order[i..j] {
            ranks[index] = rank;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

/// One-sided Wilcoxon rank-sum p-value for H₁: `x` stochastically greater
/// than `y`.
///
/// Uses exact enumeration of rank assignments when `|x| + |y| ≤ 20` and the
/// pooled values are tie-free; ties and larger samples go through the tie-
/// and continuity-corrected normal approximation.
pub fn rank_sum_one_sided(x: &[f64], y: &[f64]) -> Result<f64, CompareError> {
    if x.is_empty() || y.is_empty() {
        return Err(CompareError::EmptyInput);
    }
    let tie_free = {
        let mut pooled: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
        pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pooled.windows(2).all(|w| w[0] != w[1])
    };
    if tie_free && x.len() + y.len() <= EXACT_LIMIT {
        Ok(rank_sum_exact(x, y))
    } else {
        Ok(rank_sum_normal(x, y))
    }
}

/// Exact p-value `P(W ≥ w_obs)` by enumerating all C(n, |x|) assignments of
/// the pooled values to the first group.
pub fn rank_sum_exact(x: &[f64], y: &[f64]) -> f64 {
    let nx = x.len();
    let pooled: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
    let (ranks, _) = midranks(&pooled);
    let w_obs: f64 = ranks[..nx].iter().sum();

    let n = pooled.len();
    // midrank sums are multiples of 1/2; tolerate float noise well below that
    let threshold = w_obs - 1e-9;
    let mut at_least = 0u64;
    let mut total = 0u64;
    let mut combo: Vec<usize> = (0..nx).collect();
    loop {
        let w: f64 = combo.iter().map(|&i| ranks[i]).sum();
        if w >= threshold {
            at_least += 1;
        }
        total += 1;
        // next lexicographic combination of nx indices out of n
        let mut i = nx;
        loop {
            if i == 0 {
                return at_least as f64 / total as f64;
            }
            i -= 1;
            if combo[i] != i + n - nx {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..nx {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Normal-approximation p-value with midrank tie correction and continuity
/// correction.
pub fn rank_sum_normal(x: &[f64], y: &[f64]) -> f64 {
    let nx = x.len() as f64;
    let ny = y.len() as f64;
    let n = nx + ny;
    let pooled: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let w: f64 = ranks[..x.len()].iter().sum();
    let mean = nx * (n + 1.0) / 2.0;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let variance = nx * ny / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return 0.5; // every pooled value tied: no information either way
    }
    normal_tail((w - mean - 0.5) / variance.sqrt())
}

/// One-sided signed-rank p-value for H₁: the median of `values` is greater
/// than `center`.
///
/// Zero differences are dropped. Tie-free inputs of up to 30 differences are
/// tested exactly; everything else uses the tie-corrected normal
/// approximation. An input with no nonzero differences returns 1.0.
pub fn signed_rank_one_sided_above(values: &[f64], center: f64) -> f64 {
    let diffs: Vec<f64> = values
        .iter()
        .map(|v| v - center)
        .filter(|d| d.abs() > 1e-12)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return 1.0;
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = midranks(&magnitudes);
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&r, _)| r)
        .sum();

    let tie_free = ties.iter().all(|&t| t == 1);
    if tie_free && n <= 30 {
        return signed_rank_exact_tail(n, w_plus);
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if variance <= 0.0 {
        return 0.5;
    }
    normal_tail((w_plus - mean - 0.5) / variance.sqrt())
}

/// Counterpart of [`signed_rank_one_sided_above`] for H₁: median < center.
pub fn signed_rank_one_sided_below(values: &[f64], center: f64) -> f64 {
    let mirrored: Vec<f64> = values.iter().map(|v| 2.0 * center - v).collect();
    signed_rank_one_sided_above(&mirrored, center)
}

// P(W⁺ ≥ w) under H₀ for tie-free ranks 1..=n, by subset-sum counting.
fn signed_rank_exact_tail(n: usize, w: f64) -> f64 {
    let max_sum = n * (n + 1) / 2;
    let mut counts = vec![0.0f64; max_sum + 1];
    counts[0] = 1.0;
    for rank in 1..=n {
        for s in (rank..=max_sum).rev() {
            counts[s] += counts[s - rank];
        }
    }
    let from = (w - 1e-9).ceil().max(0.0) as usize;
    let tail: f64 = counts[from.min(max_sum)..=max_sum].iter().sum();
    tail / 2f64.powi(n as i32)
}
