//! Predictability: evaluating frozen curves against future samples.
//!
//! A curve fitted at horizon τ is evaluated, with its parameters untouched,
//! against the observed sample of the same (release, data set) at horizon
//! τ+δ. The prediction quality `Q*_ω(τ, δ)` is the usual weighted ratio over
//! those evaluations; the predictability over a span Δ is the geometric mean
//! of the prediction qualities for δ = 0..=Δ. At δ = 0 both reduce to plain
//! temporal quality.

use thiserror::Error;

use crate::fit::FittedCurve;
use crate::gof::{evaluate_sample, FitClass, GofOutcome, UntestablePolicy};
use crate::ingest::{SampleKey, SampleSet};
use crate::models::ModelId;
use crate::quality::{quality_ratio, QualityError, QualitySeries};

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("no (curve, future sample) pairs for τ = {tau}, δ = {delta}")]
    EmptyPairing { tau: u32, delta: u32 },
    #[error("prediction quality undefined at τ = {tau}, δ = {delta}: {reason}")]
    UndefinedFactor { tau: u32, delta: u32, reason: String },
    #[error(transparent)]
    Quality(#[from] QualityError),
}

/// One frozen-curve evaluation against a future sample.
#[derive(Debug, Clone)]
pub struct PredictionRecord {
    pub model: ModelId,
    /// Key of the sample the curve was fitted on (at horizon τ).
    pub fitted_at: SampleKey,
    pub delta: u32,
    /// Outcome of evaluating the frozen curve at horizon τ+δ.
    pub outcome: GofOutcome,
}

/// Aggregated prediction quality `Q*_ω(τ, δ)` with auditable denominators.
#[derive(Debug, Clone)]
pub struct PredictionQuality {
    pub value: f64,
    pub good: usize,
    pub inconclusive: usize,
    pub not_fit: usize,
    pub untestable: usize,
    /// Curves whose (release, data set) had no sample at τ+δ.
    pub excluded_missing_future: usize,
    pub records: Vec<PredictionRecord>,
}

/// Evaluates each curve (all fitted at the same horizon τ) against the
/// sample of the same release and data set at horizon τ+δ, then applies the
/// weighted quality ratio at that future horizon.
///
/// Curves lacking the future sample are excluded from the ratio and counted
/// in [`PredictionQuality::excluded_missing_future`]. The curves are used
/// exactly as fitted: no refit happens here.
pub fn prediction_quality(
    curves_at_tau: &[&FittedCurve],
    samples: &SampleSet,
    delta: u32,
    omega: f64,
    policy: UntestablePolicy,
) -> Result<PredictionQuality, PredictError> {
    let tau = curves_at_tau
        .first()
        .map(|c| c.sample_key.horizon)
        .unwrap_or(0);
    let mut records = Vec::new();
    let mut excluded = 0;
    for curve in curves_at_tau {
        let future_key = SampleKey::new(
            curve.sample_key.release.clone(),
            curve.sample_key.dataset,
            curve.sample_key.horizon + delta,
        );
        match samples.get(&future_key) {
            Some(sample) => {
                let evaluated = evaluate_sample(curve, sample);
                records.push(PredictionRecord {
                    model: curve.model,
                    fitted_at: curve.sample_key.clone(),
                    delta,
                    outcome: evaluated.outcome,
                });
            }
            None => excluded += 1,
        }
    }
    if records.is_empty() {
        return Err(PredictError::EmptyPairing { tau, delta });
    }

    let (mut good, mut inconclusive, mut not_fit, mut untestable, mut total) = (0, 0, 0, 0, 0);
    for record in &records {
        let class = match (&record.outcome, policy) {
            (GofOutcome::Tested { fit_class, .. }, _) => Some(*fit_class),
            (GofOutcome::Untestable { .. }, UntestablePolicy::CountAsNotFit) => {
                untestable += 1;
                Some(FitClass::NotFit)
            }
            (GofOutcome::Untestable { .. }, UntestablePolicy::Exclude) => {
                untestable += 1;
                None
            }
        };
        if let Some(class) = class {
            total += 1;
            match class {
                FitClass::GoodFit => good += 1,
                FitClass::InconclusiveFit => inconclusive += 1,
                FitClass::NotFit => not_fit += 1,
            }
        }
    }
    if total == 0 {
        return Err(PredictError::EmptyPairing { tau, delta });
    }
    let value = quality_ratio(good, inconclusive, total, omega)?;
    Ok(PredictionQuality {
        value,
        good,
        inconclusive,
        not_fit,
        untestable,
        excluded_missing_future: excluded,
        records,
    })
}

/// Geometric mean computed in log space; any zero factor gives exactly zero.
pub fn geometric_mean(factors: &[f64]) -> f64 {
    if factors.is_empty() {
        return f64::NAN;
    }
    if factors.iter().any(|&f| f == 0.0) {
        return 0.0;
    }
    (factors.iter().map(|f| f.ln()).sum::<f64>() / factors.len() as f64).exp()
}

/// Predictability at one horizon: per-δ factors and their geometric mean.
#[derive(Debug, Clone)]
pub struct Predictability {
    pub tau: u32,
    pub span: u32,
    pub value: f64,
    /// `Q*_ω(τ, δ)` for δ = 0..=span.
    pub factors: Vec<f64>,
    pub excluded_missing_future: usize,
}

/// Predictability of the curves fitted at τ over the span Δ:
/// the (Δ+1)-th root of the product of `Q*_ω(τ, δ)` for δ = 0..=Δ.
///
/// Every factor must be defined; a δ with no pairs makes the whole value
/// undefined.
pub fn predictability(
    curves_at_tau: &[&FittedCurve],
    samples: &SampleSet,
    span: u32,
    omega: f64,
    policy: UntestablePolicy,
) -> Result<Predictability, PredictError> {
    let tau = curves_at_tau
        .first()
        .map(|c| c.sample_key.horizon)
        .unwrap_or(0);
    let mut factors = Vec::with_capacity(span as usize + 1);
    let mut excluded = 0;
    for delta in 0..=span {
        let quality = prediction_quality(curves_at_tau, samples, delta, omega, policy).map_err(
            |e| match e {
                PredictError::EmptyPairing { tau, delta } => PredictError::UndefinedFactor {
                    tau,
                    delta,
                    reason: "no curve/sample pairs".to_string(),
                },
                other => other,
            },
        )?;
        excluded += quality.excluded_missing_future;
        factors.push(quality.value);
    }
    Ok(Predictability {
        tau,
        span,
        value: geometric_mean(&factors),
        factors,
        excluded_missing_future: excluded,
    })
}

/// A horizon that produced no predictability point, with the reason.
#[derive(Debug, Clone)]
pub struct SkippedHorizon {
    pub tau: u32,
    pub reason: String,
}

/// Per-horizon predictability series plus the horizons that had to be
/// skipped (no curves, or some δ without future samples).
#[derive(Debug, Clone)]
pub struct PredictabilitySeries {
    pub series: QualitySeries,
    pub skipped: Vec<SkippedHorizon>,
}

/// Predictability of `model` at every horizon in `horizons`, using the
/// curves fitted at each horizon and the samples for their future windows.
pub fn predictability_series(
    curves: &[FittedCurve],
    samples: &SampleSet,
    model: ModelId,
    span: u32,
    omega: f64,
    policy: UntestablePolicy,
    horizons: std::ops::RangeInclusive<u32>,
) -> PredictabilitySeries {
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for tau in horizons {
        let at_tau: Vec<&FittedCurve> = curves
            .iter()
            .filter(|c| c.model == model && c.sample_key.horizon == tau)
            .collect();
        if at_tau.is_empty() {
            skipped.push(SkippedHorizon {
                tau,
                reason: "no fitted curves at this horizon".to_string(),
            });
            continue;
        }
        match predictability(&at_tau, samples, span, omega, policy) {
            Ok(p) => points.push((tau, p.value)),
            Err(e) => skipped.push(SkippedHorizon {
                tau,
                reason: e.to_string(),
            }),
        }
    }
    PredictabilitySeries {
        series: QualitySeries {
            model,
            omega,
            points,
            window: None,
        },
        skipped,
    }
}
