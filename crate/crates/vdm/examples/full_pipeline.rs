//! Drive the five pipeline steps programmatically on a generated corpus.
//!
//! ```bash
//! cargo run -p vdm --example full_pipeline
//! ```

use std::fmt::Write as _;

use vdm::ingest::add_months;
use vdm::pipeline::{cmd_compare, cmd_fit, cmd_ingest, cmd_predict, cmd_quality, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    // generate a small record corpus: one release, about three new entries
    // per month for two years
    let release_date: chrono::NaiveDate = "2009-03-10".parse()?;
    let mut records = String::from("source,id,date,releases,refs,advisory_positions\n");
    let mut seq = 0;
    for month in 1u32..=26 {
        let new = if month == 1 { 6 } else { 2 + (month % 3) };
        for i in 0..new {
            seq += 1;
            let date = add_months(release_date, month - 1) + chrono::Days::new(4 + 3 * i as u64);
            writeln!(records, "TADV,CVE-{seq:04},{date},demo-1.0,,")?;
        }
    }
    let records_path = dir.path().join("records.csv");
    let manifest_path = dir.path().join("releases.csv");
    std::fs::write(&records_path, records)?;
    std::fs::write(
        &manifest_path,
        "release,date,product,version\ndemo-1.0,2009-03-10,demo,1.0\n",
    )?;

    let config = RunConfig {
        records: Some(records_path),
        manifest: Some(manifest_path),
        datasets: vec![vdm::ingest::DataSetId::Nvd],
        out: dir.path().join("out"),
        seed: 7,
        ..RunConfig::default()
    };

    let ingest = cmd_ingest(&config)?;
    println!(
        "ingest: {} records -> {} samples (collection date {:?})",
        ingest.records, ingest.sample_count, ingest.collection_date
    );

    let fit = cmd_fit(&config)?;
    println!(
        "fit: {} curves, {} failures, {} not converged",
        fit.curves, fit.failures, fit.non_converged
    );

    let quality = cmd_quality(&config)?;
    println!("quality: {} evaluations", quality.evaluated);
    for (model, q) in &quality.overall {
        println!("  {model}: Q = {q:.3}");
    }

    let predict = cmd_predict(&config)?;
    println!(
        "predict: {} series files, {} factor rows",
        predict.series_files, predict.factor_rows
    );

    let compare = cmd_compare(&config)?;
    for outcome in &compare.scenarios {
        let best: Vec<&str> = outcome.best.iter().map(|m| m.name()).collect();
        println!(
            "compare {}: {} edges at alpha {:.4}, best: {}",
            outcome.scenario,
            outcome.edges,
            outcome.alpha_effective,
            if best.is_empty() { "none".to_string() } else { best.join(", ") }
        );
    }

    let mut files: Vec<String> = std::fs::read_dir(config.out)?
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .collect();
    files.sort();
    println!("\nartifacts written: {}", files.join(", "));
    Ok(())
}
