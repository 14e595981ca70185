//! Vulnerability record loading, data-set joins, and sample extraction.
//!
//! Records come from three kinds of sources: third-party advisories (`TADV`,
//! e.g. NVD entries), vendor advisories (`ADV`), and vendor bug trackers
//! (`BUG`). Five data-set definitions join them per release; monthly
//! cumulative samples are then extracted per (release, data set, horizon).

mod datasets;
mod records;
mod samples;

pub use datasets::{build_dataset, dataset_entry_dates, DataSetId};
pub use records::{
    load_manifest, load_records, load_records_from_reader, RecordFormat, RecordSource, RecordStore,
    RefId, ReleaseInfo, ReleaseManifest, VulnRecord,
};
pub use samples::{
    add_months, enumerate_samples, extract_sample, months_between, ObservedSample,
    SampleEnumeration, SampleKey, SampleSet, SkippedRelease, TAU_MIN,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
    #[error("{location}: unknown source \"{name}\" (expected TADV, ADV, or BUG)")]
    UnknownSource { location: String, name: String },
    #[error("{location}: duplicate id {id} in source {record_source}")]
    DuplicateId {
        location: String,
        record_source: RecordSource,
        id: String,
    },
    #[error("unknown data set \"{0}\" (expected NVD, NVD.Bug, NVD.Advice, NVD.NBug, or Advice.NBug)")]
    UnknownDataSet(String),
    #[error("no release date known for \"{release}\"")]
    MissingReleaseDate { release: String },
    #[error("horizon {horizon} is below the minimum of {min} months")]
    HorizonBelowMinimum { horizon: u32, min: u32 },
    #[error("counts must be nondecreasing (month {month} drops from {previous} to {value})")]
    NotCumulative {
        month: usize,
        previous: u32,
        value: u32,
    },
}
