//! Load vulnerability records and realize the five data-set joins.
//!
//! ```bash
//! cargo run -p vdm --example dataset_joins
//! ```

use vdm::ingest::{
    build_dataset, extract_sample, load_records_from_reader, DataSetId, RecordFormat,
};

// a third-party database (TADV), a vendor advisory (ADV), and a bug tracker
// (BUG) with cross-references; the advisory groups its references by their
// position in the report
const RECORDS: &str = "\
source,id,date,releases,refs,advisory_positions
TADV,CVE-1,2010-02-10,P1.0,BUG:101,
TADV,CVE-2,2010-03-05,P1.0;P2.0,ADV:MFSA-1,
TADV,CVE-3,2010-04-20,P2.0,BUG:102,
TADV,CVE-4,2010-06-01,P1.0,,
BUG,101,2010-02-01,,,
BUG,102,2010-04-11,,TADV:CVE-3,
BUG,103,2010-05-02,,,
ADV,MFSA-1,2010-03-01,,TADV:CVE-2;BUG:103;BUG:101,\"TADV:CVE-2,BUG:103|BUG:101\"
";

fn main() {
    let store = load_records_from_reader(RECORDS.as_bytes(), RecordFormat::Csv, "<inline>")
        .expect("records should parse");
    println!("loaded {} records\n", store.len());

    for release in ["P1.0", "P2.0"] {
        println!("release {release}:");
        for dataset in DataSetId::ALL {
            let ids = build_dataset(&store, dataset, release);
            let list: Vec<&str> = ids.iter().map(String::as_str).collect();
            println!("  {:<12} {{{}}}", dataset.name(), list.join(", "));
        }
    }

    // monthly cumulative sample for NVD(P1.0)
    let dates: Vec<chrono::NaiveDate> = build_dataset(&store, DataSetId::Nvd, "P1.0")
        .iter()
        .map(|id| {
            store
                .get(vdm::ingest::RecordSource::Tadv, id)
                .unwrap()
                .date
        })
        .collect();
    let release_date = "2010-01-15".parse().unwrap();
    let sample = extract_sample("P1.0", DataSetId::Nvd, &dates, release_date, 8).unwrap();
    println!("\nNVD(P1.0) cumulative counts, months 1..=8: {:?}", sample.counts());
}
