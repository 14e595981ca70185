//! End-to-end behavior of the `vdm` binary: exit codes, warnings, and
//! store/report consistency.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::NaiveDate;
use vdm::ingest::{
    enumerate_samples, load_manifest, load_records, DataSetId, RecordFormat, TAU_MIN,
};

fn vdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdm"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1) // column header
        .map(|l| l.to_string())
        .collect()
}

#[test]
fn empty_record_file_succeeds_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    let manifest = dir.path().join("releases.csv");
    std::fs::write(&records, "").unwrap();
    std::fs::write(&manifest, "release,date,product,version\nP1.0,2010-01-15,P,1.0\n").unwrap();
    let out = dir.path().join("out");
    let result = vdm(&[
        "ingest",
        "--records",
        records.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("warning"), "expected a warning, got: {stderr}");
    assert!(data_rows(&out.join("samples.csv")).is_empty());
}

#[test]
fn missing_manifest_exits_nonzero_with_named_error() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    std::fs::write(&records, "").unwrap();
    let result = vdm(&[
        "ingest",
        "--records",
        records.to_str().unwrap(),
        "--manifest",
        dir.path().join("no_such_manifest.csv").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("no_such_manifest.csv"), "{stderr}");
}

#[test]
fn invalid_omega_is_an_input_error() {
    let result = vdm(&["quality", "--omega", "1.5", "--out", "/tmp/nonexistent-vdm-out"]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("omega"));
}

#[test]
fn ingest_store_matches_library_enumeration() {
    let records_path = common::fixture_path("joins_records.csv");
    let manifest_path = common::fixture_path("joins_releases.csv");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = vdm(&[
        "ingest",
        "--records",
        records_path.to_str().unwrap(),
        "--manifest",
        manifest_path.to_str().unwrap(),
        "--collection-date",
        "2012-07-01",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());

    let store = load_records(&records_path, RecordFormat::Csv).unwrap();
    let manifest = load_manifest(&manifest_path).unwrap();
    let releases: Vec<String> = manifest.releases().map(str::to_string).collect();
    let expected = enumerate_samples(
        &store,
        &manifest,
        &releases,
        &DataSetId::ALL,
        NaiveDate::from_ymd_opt(2012, 7, 1).unwrap(),
        TAU_MIN,
    )
    .unwrap();
    assert_eq!(data_rows(&out.join("samples.csv")).len(), expected.samples.len());
}

// release with exactly linear cumulative counts 3t + 2 over 16 months
fn write_linear_corpus(dir: &Path) -> (PathBuf, PathBuf) {
    let release = NaiveDate::from_ymd_opt(2010, 1, 15).unwrap();
    let mut rows = String::from("source,id,date,releases,refs,advisory_positions\n");
    let mut seq = 0;
    for month in 1u32..=16 {
        let new = if month == 1 { 5 } else { 3 };
        for i in 0..new {
            seq += 1;
            let date = vdm::ingest::add_months(release, month - 1)
                + chrono::Days::new(3 + 2 * i as u64);
            rows.push_str(&format!("TADV,CVE-L-{seq:03},{date},L1.0,,\n"));
        }
    }
    let records = dir.join("records.csv");
    let manifest = dir.join("releases.csv");
    std::fs::write(&records, rows).unwrap();
    std::fs::write(
        &manifest,
        "release,date,product,version\nL1.0,2010-01-15,linear,1.0\n",
    )
    .unwrap();
    (records, manifest)
}

fn run_ok(args: &[&str]) {
    let result = vdm(args);
    assert!(
        result.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&result.stderr)
    );
}

#[test]
fn linear_corpus_reports_perfect_quality_and_fit_cardinality() {
    let dir = tempfile::tempdir().unwrap();
    let (records, manifest) = write_linear_corpus(dir.path());
    let out = dir.path().join("out");
    run_ok(&[
        "ingest",
        "--records",
        records.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
        "--collection-date",
        "2011-06-01",
        "--datasets",
        "NVD",
        "--out",
        out.to_str().unwrap(),
    ]);
    // horizons 6..=16 of one release and one data set
    let samples = data_rows(&out.join("samples.csv"));
    assert_eq!(samples.len(), 11);

    run_ok(&[
        "fit",
        "--models",
        "LN,AML",
        "--out",
        out.to_str().unwrap(),
    ]);
    let curves = data_rows(&out.join("curves.csv"));
    assert_eq!(curves.len(), samples.len() * 2);

    run_ok(&["quality", "--models", "LN", "--out", out.to_str().unwrap()]);
    let overall = data_rows(&out.join("quality_overall.csv"));
    assert_eq!(overall.len(), 1);
    let fields: Vec<&str> = overall[0].split(',').collect();
    assert_eq!(fields[0], "LN");
    let q: f64 = fields.last().unwrap().parse().unwrap();
    assert_eq!(q, 1.0, "an exactly linear corpus must be a perfect fit");
}

#[test]
fn compare_over_six_models_reports_one_percent_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let (records, manifest) = write_linear_corpus(dir.path());
    let out = dir.path().join("out");
    let six = "AML,JW,LN,LP,RE,YF";
    run_ok(&[
        "ingest",
        "--records",
        records.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
        "--collection-date",
        "2011-06-01",
        "--datasets",
        "NVD",
        "--out",
        out.to_str().unwrap(),
    ]);
    run_ok(&["fit", "--models", six, "--out", out.to_str().unwrap()]);
    run_ok(&["quality", "--models", six, "--out", out.to_str().unwrap()]);
    run_ok(&[
        "compare",
        "--models",
        six,
        "--scenario",
        "short-term",
        "--out",
        out.to_str().unwrap(),
    ]);

    let table = data_rows(&out.join("comparison_short-term.csv"));
    assert_eq!(table.len(), 15, "C(6,2) pairwise rows");
    for row in &table {
        let alpha: f64 = row.split(',').last().unwrap().parse().unwrap();
        assert!((alpha - 0.01).abs() < 1e-12, "{row}");
    }
    // the scenario summary echoes the preset window and span
    let summary = std::fs::read_to_string(out.join("scenario_short-term.csv")).unwrap();
    assert!(summary.contains("observation=6-16") || summary.contains("observation=6-24"), "{summary}");
    assert!(summary.contains("delta=3"), "{summary}");
}

#[test]
fn quality_before_fit_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let result = vdm(&["quality", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
}
