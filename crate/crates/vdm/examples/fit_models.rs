//! Fit all eight model families to one monthly cumulative series.
//!
//! ```bash
//! cargo run -p vdm --example fit_models
//! ```

use vdm::fit::{fit, FitConfig};
use vdm::ingest::{DataSetId, ObservedSample};
use vdm::models::{evaluate, ModelId, ParamVector};

fn main() {
    // synthetic release: logistic discovery reaching ~140 vulnerabilities
    let truth = ParamVector::new(ModelId::Aml, vec![0.0015, 140.0, 0.1]).unwrap();
    let counts: Vec<u32> = (1..=30)
        .map(|t| evaluate(&truth, t as f64).unwrap().round() as u32)
        .collect();
    let sample = ObservedSample::new("demo-1.0", DataSetId::Nvd, counts).unwrap();
    println!(
        "observed sample: release {}, data set {}, horizon {} months",
        sample.release(),
        sample.dataset(),
        sample.horizon()
    );
    println!("counts: {:?}\n", sample.counts());

    let config = FitConfig::default();
    println!("{:<6} {:>12} {:>11} {:>6}  parameters", "model", "rss", "converged", "iters");
    for model in ModelId::ALL {
        let curve = fit(model, &sample, &config).expect("fit should produce a curve");
        let params: Vec<String> = model
            .param_names()
            .iter()
            .zip(curve.params.values())
            .map(|(name, value)| format!("{name}={value:.5}"))
            .collect();
        println!(
            "{:<6} {:>12.4} {:>11} {:>6}  {}",
            model.name(),
            curve.residual_sum_squares,
            curve.converged,
            curve.iterations,
            params.join(", ")
        );
    }
}
