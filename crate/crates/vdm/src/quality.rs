//! Quality metrics over evaluated samples.
//!
//! The overall quality of a model is the weighted share of fitted samples,
//! `Q_ω = (|good| + ω·|inconclusive|) / |all|`, with the inconclusiveness
//! contribution ω ∈ [0, 1] (0.5 by default: an inconclusive fit counts half).
//! Temporal quality restricts the ratio to one horizon; a trailing moving
//! average smooths the resulting series. Per lifetime period, the quality
//! distribution is tested against the 0.5 base line with a one-sided
//! signed-rank test.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::compare::{signed_rank_one_sided_above, signed_rank_one_sided_below};
use crate::gof::{EvaluatedSample, FitClass, UntestablePolicy};
use crate::models::ModelId;

/// Default inconclusiveness contribution.
pub const DEFAULT_OMEGA: f64 = 0.5;

/// Default moving-average window (odd, below the minimum horizon).
pub const DEFAULT_WINDOW: u32 = 5;

/// Quality level against which models are accepted or rejected.
pub const BASE_LINE: f64 = 0.5;

/// Significance level of the base-line verdicts.
pub const BASELINE_ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("quality is undefined over an empty evaluated set")]
    EmptySet,
    #[error("omega must lie in [0, 1], got {0}")]
    InvalidOmega(f64),
    #[error("counts are inconsistent: good {good} + inconclusive {inconclusive} exceeds total {total}")]
    InvalidCounts {
        good: usize,
        inconclusive: usize,
        total: usize,
    },
    #[error("no evaluated samples at horizon {0}")]
    NoSamplesAtHorizon(u32),
    #[error("moving-average window must be odd, got {0}")]
    EvenWindow(u32),
    #[error("series of {len} points is shorter than window {window}")]
    SeriesTooShort { window: u32, len: usize },
    #[error("no evaluated samples in the {0} period")]
    EmptyPeriod(Period),
}

fn check_omega(omega: f64) -> Result<(), QualityError> {
    if (0.0..=1.0).contains(&omega) {
        Ok(())
    } else {
        Err(QualityError::InvalidOmega(omega))
    }
}

/// The quality ratio from pre-tallied counts.
pub fn quality_ratio(
    good: usize,
    inconclusive: usize,
    total: usize,
    omega: f64,
) -> Result<f64, QualityError> {
    check_omega(omega)?;
    if total == 0 {
        return Err(QualityError::EmptySet);
    }
    if good + inconclusive > total {
        return Err(QualityError::InvalidCounts {
            good,
            inconclusive,
            total,
        });
    }
    Ok((good as f64 + omega * inconclusive as f64) / total as f64)
}

fn tally(
    evaluated: impl Iterator<Item = Option<FitClass>>,
) -> (usize, usize, usize) {
    let (mut good, mut inconclusive, mut total) = (0, 0, 0);
    for class in evaluated.flatten() {
        total += 1;
        match class {
            FitClass::GoodFit => good += 1,
            FitClass::InconclusiveFit => inconclusive += 1,
            FitClass::NotFit => {}
        }
    }
    (good, inconclusive, total)
}

/// Overall quality `Q_ω` of an evaluated set.
pub fn overall_quality(
    evaluated: &[EvaluatedSample],
    omega: f64,
    policy: UntestablePolicy,
) -> Result<f64, QualityError> {
    let (good, inconclusive, total) = tally(evaluated.iter().map(|e| e.effective_class(policy)));
    quality_ratio(good, inconclusive, total, omega)
}

/// Temporal quality `Q_ω(τ)`: the same ratio restricted to horizon `τ`.
pub fn temporal_quality(
    evaluated: &[EvaluatedSample],
    horizon: u32,
    omega: f64,
    policy: UntestablePolicy,
) -> Result<f64, QualityError> {
    let (good, inconclusive, total) = tally(
        evaluated
            .iter()
            .filter(|e| e.horizon() == horizon)
            .map(|e| e.effective_class(policy)),
    );
    if total == 0 {
        return Err(QualityError::NoSamplesAtHorizon(horizon));
    }
    quality_ratio(good, inconclusive, total, omega)
}

/// A per-horizon metric series for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct QualitySeries {
    pub model: ModelId,
    pub omega: f64,
    /// (horizon, value) pairs with strictly increasing horizons.
    pub points: Vec<(u32, f64)>,
    /// Window size when this series is a smoothed variant.
    pub window: Option<u32>,
}

/// Temporal-quality series of one model over every horizon present in the
/// evaluated set.
pub fn temporal_quality_series(
    model: ModelId,
    evaluated: &[EvaluatedSample],
    omega: f64,
    policy: UntestablePolicy,
) -> Result<QualitySeries, QualityError> {
    check_omega(omega)?;
    let of_model: Vec<&EvaluatedSample> = evaluated
        .iter()
        .filter(|e| e.curve.model == model)
        .collect();
    let mut per_horizon: BTreeMap<u32, (usize, usize, usize)> = BTreeMap::new();
    for sample in of_model {
        if let Some(class) = sample.effective_class(policy) {
            let slot = per_horizon.entry(sample.horizon()).or_default();
            slot.2 += 1;
            match class {
                FitClass::GoodFit => slot.0 += 1,
                FitClass::InconclusiveFit => slot.1 += 1,
                FitClass::NotFit => {}
            }
        }
    }
    if per_horizon.is_empty() {
        return Err(QualityError::EmptySet);
    }
    let points = per_horizon
        .into_iter()
        .map(|(tau, (good, inconclusive, total))| {
            quality_ratio(good, inconclusive, total, omega).map(|q| (tau, q))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QualitySeries {
        model,
        omega,
        points,
        window: None,
    })
}

/// Trailing moving average `MA_k(τ) = (1/k) Σ_{i=1..k} Q(τ - i + 1)`.
///
/// Output points exist only where all `k` trailing horizons are present and
/// consecutive. `k` must be odd.
pub fn moving_average(series: &QualitySeries, k: u32) -> Result<QualitySeries, QualityError> {
    if k == 0 || k % 2 == 0 {
        return Err(QualityError::EvenWindow(k));
    }
    if series.points.len() < k as usize {
        return Err(QualityError::SeriesTooShort {
            window: k,
            len: series.points.len(),
        });
    }
    let k_usize = k as usize;
    let mut points = Vec::new();
    for i in k_usize - 1..series.points.len() {
        let window = &series.points[i + 1 - k_usize..=i];
        let contiguous = window[window.len() - 1].0 - window[0].0 == k - 1;
        if !contiguous {
            continue;
        }
        let mean = window.iter().map(|&(_, q)| q).sum::<f64>() / k as f64;
        points.push((window[window.len() - 1].0, mean));
    }
    Ok(QualitySeries {
        model: series.model,
        omega: series.omega,
        points,
        window: Some(k),
    })
}

/// Software lifetime periods by release age.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Period {
    /// Months 6–12.
    Young,
    /// Months 13–36.
    MiddleAge,
    /// Months 37–72.
    Old,
}

impl Period {
    pub const ALL: [Period; 3] = [Period::Young, Period::MiddleAge, Period::Old];

    pub fn name(self) -> &'static str {
        match self {
            Period::Young => "young",
            Period::MiddleAge => "middle-age",
            Period::Old => "old",
        }
    }

    /// Inclusive horizon range.
    pub fn range(self) -> (u32, u32) {
        match self {
            Period::Young => (6, 12),
            Period::MiddleAge => (13, 36),
            Period::Old => (37, 72),
        }
    }

    pub fn contains(self, horizon: u32) -> bool {
        let (lo, hi) = self.range();
        (lo..=hi).contains(&horizon)
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Verdict of a quality distribution against the 0.5 base line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineVerdict {
    Above,
    Below,
    Indistinguishable,
}

impl BaselineVerdict {
    pub fn name(self) -> &'static str {
        match self {
            BaselineVerdict::Above => "above",
            BaselineVerdict::Below => "below",
            BaselineVerdict::Indistinguishable => "indistinguishable",
        }
    }
}

impl fmt::Display for BaselineVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Distribution of per-horizon quality within one lifetime period, with its
/// base-line verdict.
#[derive(Debug, Clone)]
pub struct PeriodQuality {
    pub model: ModelId,
    pub period: Period,
    /// (horizon, quality) pairs inside the period.
    pub qualities: Vec<(u32, f64)>,
    pub median: f64,
    pub verdict: BaselineVerdict,
    pub p_above: f64,
    pub p_below: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Per-horizon quality inside `period`, its median, and the verdict of a
/// one-sided signed-rank test against the 0.5 base line.
pub fn quality_by_period(
    model: ModelId,
    evaluated: &[EvaluatedSample],
    omega: f64,
    policy: UntestablePolicy,
    period: Period,
) -> Result<PeriodQuality, QualityError> {
    let series = temporal_quality_series(model, evaluated, omega, policy)?;
    let qualities: Vec<(u32, f64)> = series
        .points
        .into_iter()
        .filter(|&(tau, _)| period.contains(tau))
        .collect();
    if qualities.is_empty() {
        return Err(QualityError::EmptyPeriod(period));
    }
    let values: Vec<f64> = qualities.iter().map(|&(_, q)| q).collect();
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p_above = signed_rank_one_sided_above(&values, BASE_LINE);
    let p_below = signed_rank_one_sided_below(&values, BASE_LINE);
    let verdict = if p_above < BASELINE_ALPHA {
        BaselineVerdict::Above
    } else if p_below < BASELINE_ALPHA {
        BaselineVerdict::Below
    } else {
        BaselineVerdict::Indistinguishable
    };
    Ok(PeriodQuality {
        model,
        period,
        qualities,
        median: median(&sorted),
        verdict,
        p_above,
        p_below,
    })
}
