//! Evaluate frozen curves on future samples and aggregate into the
//! geometric-mean predictability.
//!
//! ```bash
//! cargo run -p vdm --example predictability
//! ```

use vdm::fit::{fit, FitConfig, FittedCurve};
use vdm::gof::UntestablePolicy;
use vdm::ingest::{DataSetId, ObservedSample, SampleSet};
use vdm::models::{evaluate, ModelId, ParamVector};
use vdm::predict::{prediction_quality, predictability, predictability_series};

fn main() {
    // four synthetic releases following saturating discovery curves
    let mut samples = SampleSet::new();
    for k in 0..4u32 {
        let truth = ParamVector::new(
            ModelId::Aml,
            vec![0.0012 + 0.0003 * k as f64, 110.0 + 20.0 * k as f64, 0.09],
        )
        .unwrap();
        let counts: Vec<u32> = (1..=36)
            .map(|t| evaluate(&truth, t as f64).unwrap().round() as u32)
            .collect();
        let full = ObservedSample::new(format!("demo-{k}"), DataSetId::Nvd, counts).unwrap();
        for tau in 6..=36 {
            samples.insert(full.prefix(tau).unwrap());
        }
    }

    let config = FitConfig::default();
    let policy = UntestablePolicy::CountAsNotFit;
    let tau = 12u32;

    for model in [ModelId::Aml, ModelId::Ln] {
        let curves: Vec<FittedCurve> = samples
            .iter()
            .filter(|s| s.horizon() == tau)
            .map(|s| fit(model, s, &config).unwrap())
            .collect();
        let refs: Vec<&FittedCurve> = curves.iter().collect();

        println!("{model}, curves frozen at tau = {tau}:");
        for delta in [0u32, 3, 6, 12] {
            let q = prediction_quality(&refs, &samples, delta, 0.5, policy).unwrap();
            println!(
                "  Q*(tau, {delta:>2}) = {:.3}  (good {}, inconclusive {}, poor {})",
                q.value, q.good, q.inconclusive, q.not_fit
            );
        }
        for span in [3u32, 12] {
            let p = predictability(&refs, &samples, span, 0.5, policy).unwrap();
            println!("  predictability over delta 0..={span}: {:.3}", p.value);
        }
    }

    // whole-series view for the linear model over a one-year span
    let curves: Vec<FittedCurve> = samples
        .iter()
        .filter(|s| s.horizon() >= 6 && s.horizon() <= 24)
        .map(|s| fit(ModelId::Ln, s, &config).unwrap())
        .collect();
    let result = predictability_series(&curves, &samples, ModelId::Ln, 12, 0.5, policy, 6..=24);
    print!("\nLN predictability series (span 12):");
    for (tau, value) in &result.series.points {
        print!(" {tau}:{value:.2}");
    }
    println!();
    if !result.skipped.is_empty() {
        println!("skipped horizons: {}", result.skipped.len());
    }
}
