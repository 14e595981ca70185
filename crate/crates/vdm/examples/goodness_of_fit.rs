//! Score fitted curves with the Pearson χ² test and classify the fits.
//!
//! ```bash
//! cargo run -p vdm --example goodness_of_fit
//! ```

use vdm::fit::{fit, FitConfig};
use vdm::gof::{chi_square_pvalue, chi_square_stat, classify, evaluate_sample, GofOutcome};
use vdm::ingest::{DataSetId, ObservedSample};
use vdm::models::ModelId;

fn main() {
    let sample = ObservedSample::new(
        "demo-1.0",
        DataSetId::Nvd,
        vec![6, 11, 19, 24, 28, 35, 42, 44, 49, 56, 61, 66],
    )
    .unwrap();
    let config = FitConfig::default();

    for model in [ModelId::Ln, ModelId::Aml, ModelId::At] {
        let curve = fit(model, &sample, &config).unwrap();
        let stat = chi_square_stat(&curve, &sample).unwrap();
        let p = chi_square_pvalue(stat.chi_square, stat.dof);
        println!(
            "{}: chi_square = {:.4}, dof = {} (months {}..{}), p = {:.4} -> {:?}",
            model,
            stat.chi_square,
            stat.dof,
            stat.binning_start,
            sample.horizon(),
            p,
            classify(p).unwrap()
        );
    }

    // a curve whose expected counts never reach 5 cannot be tested; the
    // evaluation records that as a distinct untestable outcome
    let tiny = ObservedSample::new("demo-1.0", DataSetId::NvdBug, vec![0, 1, 1, 2, 2, 3]).unwrap();
    let curve = fit(ModelId::Ln, &tiny, &config).unwrap();
    let evaluated = evaluate_sample(&curve, &tiny);
    match evaluated.outcome {
        GofOutcome::Untestable { reason } => {
            println!("sparse sample: untestable ({reason}), counted as a poor fit by default")
        }
        GofOutcome::Tested { p_value, .. } => println!("sparse sample: tested, p = {p_value:.4}"),
    }
}
