//! Aggregate evaluated samples into overall quality, the temporal quality
//! series with its moving average, and per-period base-line verdicts.
//!
//! ```bash
//! cargo run -p vdm --example quality_analysis
//! ```

use vdm::fit::{fit, FitConfig};
use vdm::gof::{evaluate_sample, EvaluatedSample, UntestablePolicy};
use vdm::ingest::{DataSetId, ObservedSample, SampleSet};
use vdm::models::{evaluate, ModelId, ParamVector};
use vdm::quality::{
    moving_average, overall_quality, quality_by_period, temporal_quality_series, Period,
};

// three synthetic releases with logistic discovery curves, sampled at every
// horizon from 6 to 30 months
fn build_evaluated(model: ModelId) -> Vec<EvaluatedSample> {
    let config = FitConfig::default();
    let mut samples = SampleSet::new();
    for (k, (a, b, c)) in [(0.0015, 140.0, 0.1), (0.002, 90.0, 0.15), (0.001, 200.0, 0.07)]
        .into_iter()
        .enumerate()
    {
        let truth = ParamVector::new(ModelId::Aml, vec![a, b, c]).unwrap();
        let counts: Vec<u32> = (1..=30)
            .map(|t| evaluate(&truth, t as f64).unwrap().round() as u32)
            .collect();
        let full = ObservedSample::new(format!("demo-{k}"), DataSetId::Nvd, counts).unwrap();
        for tau in 6..=30 {
            samples.insert(full.prefix(tau).unwrap());
        }
    }
    samples
        .iter()
        .map(|s| {
            let curve = fit(model, s, &config).unwrap();
            evaluate_sample(&curve, s)
        })
        .collect()
}

fn main() {
    let omega = 0.5;
    let policy = UntestablePolicy::CountAsNotFit;
    for model in [ModelId::Aml, ModelId::At] {
        let evaluated = build_evaluated(model);
        let q = overall_quality(&evaluated, omega, policy).unwrap();
        println!("{model}: overall quality Q = {q:.3} over {} evaluations", evaluated.len());

        let series = temporal_quality_series(model, &evaluated, omega, policy).unwrap();
        let smoothed = moving_average(&series, 5).unwrap();
        print!("  Q(tau):");
        for &(tau, q) in series.points.iter().take(8) {
            print!(" {tau}:{q:.2}");
        }
        println!(" ...");
        print!("  MA5:   ");
        for &(tau, q) in smoothed.points.iter().take(6) {
            print!(" {tau}:{q:.2}");
        }
        println!(" ...");

        for period in [Period::Young, Period::MiddleAge] {
            let report = quality_by_period(model, &evaluated, omega, policy, period).unwrap();
            println!(
                "  {period}: median {:.2} over {} horizons -> {} (vs 0.5 base line, p_above = {:.4})",
                report.median,
                report.qualities.len(),
                report.verdict,
                report.p_above
            );
        }
    }
}
