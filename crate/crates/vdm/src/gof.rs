//! Pearson χ² goodness of fit and the three-way fit classification.
//!
//! The statistic compares observed cumulative counts `O_t` against the
//! curve's expected values `E_t = Ω(t)`. Months are included starting from
//! the first `t` with `E_t ≥ 5` (leading months below the threshold are
//! dropped to keep the test valid); degrees of freedom are the number of
//! included months minus one, deliberately not reduced by the number of
//! fitted parameters.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fit::FittedCurve;
use crate::ingest::{ObservedSample, SampleKey};
use crate::models::{evaluate, ModelError};
use crate::special::gamma_q;

/// Expected counts below this threshold invalidate the χ² test.
pub const EXPECTED_MIN: f64 = 5.0;

/// p-value at or above which a fit is accepted.
pub const GOOD_FIT_MIN_P: f64 = 0.80;

/// p-value below which a fit is rejected.
pub const NOT_FIT_MAX_P: f64 = 0.05;

/// Three-way classification of an evaluated sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitClass {
    /// p ∈ [0.80, 1.0]: good evidence to accept the model.
    GoodFit,
    /// p ∈ [0.05, 0.80): not enough evidence either way.
    InconclusiveFit,
    /// p ∈ [0, 0.05): strong evidence to reject the model.
    NotFit,
}

impl FitClass {
    pub fn name(self) -> &'static str {
        match self {
            FitClass::GoodFit => "good",
            FitClass::InconclusiveFit => "inconclusive",
            FitClass::NotFit => "notfit",
        }
    }
}

impl fmt::Display for FitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitClass {
    type Err = GofError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "good" => Ok(FitClass::GoodFit),
            "inconclusive" => Ok(FitClass::InconclusiveFit),
            "notfit" => Ok(FitClass::NotFit),
            other => Err(GofError::UnknownClass(other.to_string())),
        }
    }
}

/// Why the χ² test could not be applied to a curve/sample pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UntestableReason {
    /// No month has an expected value of at least [`EXPECTED_MIN`].
    NoExpectedAboveThreshold,
    /// Fewer than two months remain after binning (dof < 1).
    TooFewMonths,
    /// An included month has a nonpositive expected value (the fitted curve
    /// is not a valid count model there).
    NonPositiveExpected,
}

impl UntestableReason {
    pub fn name(self) -> &'static str {
        match self {
            UntestableReason::NoExpectedAboveThreshold => "no_expected_ge_5",
            UntestableReason::TooFewMonths => "too_few_months",
            UntestableReason::NonPositiveExpected => "nonpositive_expected",
        }
    }
}

impl fmt::Display for UntestableReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UntestableReason {
    type Err = GofError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no_expected_ge_5" => Ok(UntestableReason::NoExpectedAboveThreshold),
            "too_few_months" => Ok(UntestableReason::TooFewMonths),
            "nonpositive_expected" => Ok(UntestableReason::NonPositiveExpected),
            other => Err(GofError::UnknownClass(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum GofError {
    #[error("observed and expected series differ in length ({observed} vs {expected})")]
    LengthMismatch { observed: usize, expected: usize },
    #[error("chi-square test inapplicable: {0}")]
    Inapplicable(UntestableReason),
    #[error("p-value {0} is outside [0, 1]")]
    PValueOutOfRange(f64),
    #[error("unknown fit class \"{0}\"")]
    UnknownClass(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// χ² statistic with its binning metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareStat {
    pub chi_square: f64,
    /// Included months minus one.
    pub dof: u32,
    /// First month index (1-based) included after the `E_t ≥ 5` adjustment.
    pub binning_start: u32,
}

/// Core χ² computation over aligned observed/expected series (month 1 first).
pub fn chi_square_from_series(
    observed: &[f64],
    expected: &[f64],
) -> Result<ChiSquareStat, GofError> {
    if observed.len() != expected.len() {
        return Err(GofError::LengthMismatch {
            observed: observed.len(),
            expected: expected.len(),
        });
    }
    let start = expected
        .iter()
        .position(|&e| e >= EXPECTED_MIN)
        .ok_or(GofError::Inapplicable(UntestableReason::NoExpectedAboveThreshold))?;
    let included = expected.len() - start;
    if included < 2 {
        return Err(GofError::Inapplicable(UntestableReason::TooFewMonths));
    }
    let mut chi_square = 0.0;
    for (&o, &e) in observed[start..].iter().zip(&expected[start..]) {
        if e <= 0.0 {
            return Err(GofError::Inapplicable(UntestableReason::NonPositiveExpected));
        }
        let d = o - e;
        chi_square += d * d / e;
    }
    Ok(ChiSquareStat {
        chi_square,
        dof: (included - 1) as u32,
        binning_start: (start + 1) as u32,
    })
}

/// χ² statistic of a fitted curve against an observed sample.
pub fn chi_square_stat(
    curve: &FittedCurve,
    sample: &ObservedSample,
) -> Result<ChiSquareStat, GofError> {
    let observed = sample.counts_f64();
    let mut expected = Vec::with_capacity(observed.len());
    for t in 1..=observed.len() {
        expected.push(evaluate(&curve.params, t as f64)?);
    }
    chi_square_from_series(&observed, &expected)
}

/// Upper-tail p-value of the χ² distribution: `Q(dof/2, χ²/2)`.
///
/// Requires `chi_square ≥ 0` and `dof ≥ 1`; accurate to better than 1e-10.
pub fn chi_square_pvalue(chi_square: f64, dof: u32) -> f64 {
    debug_assert!(chi_square >= 0.0 && dof >= 1);
    gamma_q(dof as f64 / 2.0, chi_square / 2.0)
}

/// Classifies a p-value per the acceptance thresholds.
pub fn classify(p: f64) -> Result<FitClass, GofError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GofError::PValueOutOfRange(p));
    }
    Ok(if p >= GOOD_FIT_MIN_P {
        FitClass::GoodFit
    } else if p < NOT_FIT_MAX_P {
        FitClass::NotFit
    } else {
        FitClass::InconclusiveFit
    })
}

/// Result of evaluating one curve against one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum GofOutcome {
    Tested {
        chi_square: f64,
        dof: u32,
        p_value: f64,
        fit_class: FitClass,
        binning_start: u32,
    },
    /// The χ² test could not be applied; counted as a poor fit by default.
    Untestable { reason: UntestableReason },
}

/// How untestable outcomes enter quality denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UntestablePolicy {
    /// Count the sample and treat it as [`FitClass::NotFit`] (default: the
    /// evaluation never skips samples).
    #[default]
    CountAsNotFit,
    /// Drop the sample from numerator and denominator alike.
    Exclude,
}

impl FromStr for UntestablePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "notfit" | "count-as-notfit" => Ok(UntestablePolicy::CountAsNotFit),
            "exclude" => Ok(UntestablePolicy::Exclude),
            other => Err(format!("unknown untestable policy \"{other}\"")),
        }
    }
}

/// An observed sample, a fitted curve, and the χ² verdict of evaluating the
/// curve against that sample.
///
/// For plain quality analysis the curve was fitted on the sample itself; for
/// prediction analysis the curve was frozen at an earlier horizon and
/// `sample_key` names the future sample it was evaluated against.
#[derive(Debug, Clone)]
pub struct EvaluatedSample {
    pub sample_key: SampleKey,
    pub curve: FittedCurve,
    pub outcome: GofOutcome,
}

impl EvaluatedSample {
    /// The classification used in quality counting, or `None` when the
    /// policy excludes this sample.
    pub fn effective_class(&self, policy: UntestablePolicy) -> Option<FitClass> {
        match (&self.outcome, policy) {
            (GofOutcome::Tested { fit_class, .. }, _) => Some(*fit_class),
            (GofOutcome::Untestable { .. }, UntestablePolicy::CountAsNotFit) => {
                Some(FitClass::NotFit)
            }
            (GofOutcome::Untestable { .. }, UntestablePolicy::Exclude) => None,
        }
    }

    pub fn p_value(&self) -> Option<f64> {
        match &self.outcome {
            GofOutcome::Tested { p_value, .. } => Some(*p_value),
            GofOutcome::Untestable { .. } => None,
        }
    }

    pub fn horizon(&self) -> u32 {
        self.sample_key.horizon
    }
}

/// Composes [`chi_square_stat`], [`chi_square_pvalue`], and [`classify`].
///
/// An inapplicable test becomes a distinct untestable outcome rather than an
/// error, so batch evaluation never skips samples.
pub fn evaluate_sample(curve: &FittedCurve, sample: &ObservedSample) -> EvaluatedSample {
    let outcome = match chi_square_stat(curve, sample) {
        Ok(stat) => {
            let p_value = chi_square_pvalue(stat.chi_square, stat.dof);
            let fit_class = classify(p_value).expect("Q(a, x) lies in [0, 1]");
            GofOutcome::Tested {
                chi_square: stat.chi_square,
                dof: stat.dof,
                p_value,
                fit_class,
                binning_start: stat.binning_start,
            }
        }
        Err(GofError::Inapplicable(reason)) => GofOutcome::Untestable { reason },
        Err(GofError::Model(_)) | Err(_) => GofOutcome::Untestable {
            reason: UntestableReason::NonPositiveExpected,
        },
    };
    EvaluatedSample {
        sample_key: sample.key(),
        curve: curve.clone(),
        outcome,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DataSetId;
    use crate::models::{ModelId, ParamVector};

    fn curve(model: ModelId, values: &[f64], horizon: u32) -> FittedCurve {
        FittedCurve {
            model,
            params: ParamVector::new(model, values.to_vec()).unwrap(),
            sample_key: SampleKey::new("P1.0", DataSetId::Nvd, horizon),
            residual_sum_squares: 0.0,
            converged: true,
            iterations: 1,
        }
    }

    #[test]
    fn perfect_fit_has_zero_statistic() {
        let o = [6.0, 8.0, 11.0, 15.0, 21.0, 25.0];
        let stat = chi_square_from_series(&o, &o).unwrap();
        assert_eq!(stat.chi_square, 0.0);
        assert_eq!(stat.binning_start, 1);
        assert_eq!(stat.dof, 5);
        assert_eq!(chi_square_pvalue(stat.chi_square, stat.dof), 1.0);
    }

    #[test]
    fn two_month_series_has_one_degree_of_freedom() {
        let stat = chi_square_from_series(&[6.0, 8.0], &[6.0, 8.0]).unwrap();
        assert_eq!(stat.chi_square, 0.0);
        assert_eq!(stat.dof, 1);
        assert_eq!(stat.binning_start, 1);
    }

    #[test]
    fn binning_drops_leading_months_below_five() {
        let expected = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0];
        let observed = [1.0, 5.0, 7.0, 7.0, 11.0, 13.0];
        let stat = chi_square_from_series(&observed, &expected).unwrap();
        // first E_t ≥ 5 is month 3; four months included, dof 3
        assert_eq!(stat.binning_start, 3);
        assert_eq!(stat.dof, 3);
        // reference sum computed independently over the included months
        let reference: f64 = (2..6).map(|i| {
            let d: f64 = observed[i] - expected[i];
            d * d / expected[i]
        })
        .sum();
        assert!((stat.chi_square - reference).abs() < 1e-12);
    }

    #[test]
    fn statistic_ignores_prepended_low_expectation_months() {
        let observed = [9.0, 7.0, 11.0, 13.0];
        let expected = [8.0, 8.0, 10.0, 12.0];
        let base = chi_square_from_series(&observed, &expected).unwrap();
        let observed2 = [0.0, 2.0, 9.0, 7.0, 11.0, 13.0];
        let expected2 = [1.0, 4.9, 8.0, 8.0, 10.0, 12.0];
        let extended = chi_square_from_series(&observed2, &expected2).unwrap();
        assert_eq!(base.chi_square, extended.chi_square);
        assert_eq!(base.dof, extended.dof);
        assert_eq!(extended.binning_start, 3);
    }

    #[test]
    fn joint_scaling_scales_the_statistic_linearly() {
        let observed = [6.0, 9.0, 14.0, 22.0];
        let expected = [7.0, 10.0, 13.0, 20.0];
        let base = chi_square_from_series(&observed, &expected).unwrap();
        let c = 3.7;
        let so: Vec<f64> = observed.iter().map(|v| v * c).collect();
        let se: Vec<f64> = expected.iter().map(|v| v * c).collect();
        let scaled = chi_square_from_series(&so, &se).unwrap();
        assert!((scaled.chi_square - c * base.chi_square).abs() < 1e-10);
    }

    #[test]
    fn inapplicable_when_no_expectation_reaches_five() {
        let err = chi_square_from_series(&[1.0, 2.0], &[0.5, 4.0]).unwrap_err();
        assert!(matches!(
            err,
            GofError::Inapplicable(UntestableReason::NoExpectedAboveThreshold)
        ));
        let err = chi_square_from_series(&[1.0, 2.0], &[0.5, 6.0]).unwrap_err();
        assert!(matches!(
            err,
            GofError::Inapplicable(UntestableReason::TooFewMonths)
        ));
    }

    #[test]
    fn pvalue_matches_known_quantiles() {
        // 3.841 is the 95% quantile of χ² with 1 dof
        assert!((chi_square_pvalue(3.841, 1) - 0.0500).abs() < 5e-4);
        assert!((chi_square_pvalue(4.351, 10) - 0.930).abs() < 5e-3);
    }

    // quadrature oracle for the χ² upper tail, independent of gamma_q:
    // integrates x^(k/2-1) e^(-x/2) / (2^(k/2) Γ(k/2)) with exact
    // half-integer gamma values
    fn chi2_tail_oracle(x: f64, dof: u32) -> f64 {
        fn gamma_half(two_a: u32) -> f64 {
            // Γ(two_a / 2) for integer two_a ≥ 1
            if two_a % 2 == 0 {
                (1..two_a / 2).map(|k| k as f64).product()
            } else {
                let n = (two_a - 1) / 2;
                let mut value = std::f64::consts::PI.sqrt();
                for k in 0..n {
                    value *= 0.5 + k as f64;
                }
                value
            }
        }
        let a = dof as f64 / 2.0;
        let norm = 2f64.powf(a) * gamma_half(dof);
        let pdf = move |t: f64| t.powf(a - 1.0) * (-t / 2.0).exp() / norm;
        let upper = x + 80.0 + 4.0 * dof as f64;
        let n = 200_000;
        let h = (upper - x) / n as f64;
        let mut sum = 0.5 * (pdf(x) + pdf(upper));
        for i in 1..n {
            sum += pdf(x + i as f64 * h);
        }
        sum * h
    }

    #[test]
    fn pvalue_matches_quadrature_oracle() {
        for &(x, dof) in &[(3.841, 1u32), (4.351, 10), (1.2, 3), (25.0, 9), (60.0, 40)] {
            let oracle = chi2_tail_oracle(x, dof);
            let got = chi_square_pvalue(x, dof);
            assert!(
                (got - oracle).abs() < 1e-6,
                "χ²={x}, dof={dof}: {got} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn pvalue_is_monotone_decreasing_in_the_statistic() {
        for dof in [1u32, 2, 5, 20] {
            let mut prev = 1.0;
            for i in 1..100 {
                let x = i as f64 * 0.5;
                let p = chi_square_pvalue(x, dof);
                assert!(p < prev, "dof={dof}, x={x}");
                prev = p;
            }
        }
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify(0.993).unwrap(), FitClass::GoodFit);
        assert_eq!(classify(0.417).unwrap(), FitClass::InconclusiveFit);
        assert_eq!(classify(0.0001).unwrap(), FitClass::NotFit);
        // boundaries are inclusive on the upper class
        assert_eq!(classify(0.80).unwrap(), FitClass::GoodFit);
        assert_eq!(classify(0.05).unwrap(), FitClass::InconclusiveFit);
        assert_eq!(classify(0.0).unwrap(), FitClass::NotFit);
        assert_eq!(classify(1.0).unwrap(), FitClass::GoodFit);
        assert!(classify(-0.01).is_err());
        assert!(classify(1.01).is_err());
    }

    #[test]
    fn zero_statistic_is_always_a_good_fit() {
        for dof in 1..=60 {
            let p = chi_square_pvalue(0.0, dof);
            assert_eq!(classify(p).unwrap(), FitClass::GoodFit);
        }
    }

    #[test]
    fn perfect_sample_evaluates_to_good_fit() {
        let c = curve(ModelId::Ln, &[2.0, 5.0], 6);
        let counts: Vec<u32> = (1..=6).map(|t| 2 * t + 5).collect();
        let sample = ObservedSample::new("P1.0", DataSetId::Nvd, counts).unwrap();
        let evaluated = evaluate_sample(&c, &sample);
        match evaluated.outcome {
            GofOutcome::Tested { p_value, fit_class, .. } => {
                assert_eq!(p_value, 1.0);
                assert_eq!(fit_class, FitClass::GoodFit);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn curve_below_threshold_everywhere_is_untestable() {
        let c = curve(ModelId::Ln, &[0.1, 0.2], 6);
        let sample = ObservedSample::new("P1.0", DataSetId::Nvd, vec![0, 1, 1, 1, 2, 2]).unwrap();
        let evaluated = evaluate_sample(&c, &sample);
        assert!(matches!(
            evaluated.outcome,
            GofOutcome::Untestable { reason: UntestableReason::NoExpectedAboveThreshold }
        ));
        assert_eq!(
            evaluated.effective_class(UntestablePolicy::CountAsNotFit),
            Some(FitClass::NotFit)
        );
        assert_eq!(evaluated.effective_class(UntestablePolicy::Exclude), None);
    }

    #[test]
    fn regenerated_logistic_sample_is_a_good_fit() {
        let params = [0.001, 183.0, 0.078];
        let c = curve(ModelId::Aml, &params, 30);
        let truth = ParamVector::new(ModelId::Aml, params.to_vec()).unwrap();
        let counts: Vec<u32> = (1..=30)
            .map(|t| crate::models::evaluate(&truth, t as f64).unwrap().round() as u32)
            .collect();
        let sample = ObservedSample::new("FF3.0", DataSetId::Nvd, counts).unwrap();
        let evaluated = evaluate_sample(&c, &sample);
        match evaluated.outcome {
            GofOutcome::Tested { fit_class, p_value, .. } => {
                assert_eq!(fit_class, FitClass::GoodFit, "p = {p_value}");
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}
