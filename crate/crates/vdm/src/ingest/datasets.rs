//! The five data-set join definitions.
//!
//! Each data set is a set comprehension over the record store for a given
//! release `r`:
//!
//! * `NVD(r)` — TADV entries claiming `r` vulnerable.
//! * `NVD.Bug(r)` — those additionally confirmed by an existing BUG record.
//! * `NVD.Advice(r)` — those additionally confirmed by an existing ADV record.
//! * `NVD.NBug(r)` — the BUG entries referenced from qualifying TADV entries.
//! * `Advice.NBug(r)` — BUG entries co-clustered with a qualifying TADV id
//!   inside some advisory (same or adjacent reference group).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use super::records::{RecordSource, RecordStore, RefId, VulnRecord};
use super::IngestError;

/// Identifier of one of the five data-set definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataSetId {
    Nvd,
    NvdBug,
    NvdAdvice,
    NvdNBug,
    AdviceNBug,
}

impl DataSetId {
    pub const ALL: [DataSetId; 5] = [
        DataSetId::Nvd,
        DataSetId::NvdBug,
        DataSetId::NvdAdvice,
        DataSetId::NvdNBug,
        DataSetId::AdviceNBug,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DataSetId::Nvd => "NVD",
            DataSetId::NvdBug => "NVD.Bug",
            DataSetId::NvdAdvice => "NVD.Advice",
            DataSetId::NvdNBug => "NVD.NBug",
            DataSetId::AdviceNBug => "Advice.NBug",
        }
    }

    /// Which source the returned entry ids belong to.
    pub fn entry_source(self) -> RecordSource {
        match self {
            DataSetId::Nvd | DataSetId::NvdBug | DataSetId::NvdAdvice => RecordSource::Tadv,
            DataSetId::NvdNBug | DataSetId::AdviceNBug => RecordSource::Bug,
        }
    }
}

impl fmt::Display for DataSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DataSetId {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nvd" => Ok(DataSetId::Nvd),
            "nvd.bug" => Ok(DataSetId::NvdBug),
            "nvd.advice" => Ok(DataSetId::NvdAdvice),
            "nvd.nbug" => Ok(DataSetId::NvdNBug),
            "advice.nbug" => Ok(DataSetId::AdviceNBug),
            _ => Err(IngestError::UnknownDataSet(s.to_string())),
        }
    }
}

fn claims_release(record: &VulnRecord, release: &str) -> bool {
    record.releases.contains(release)
}

fn refs_existing(record: &VulnRecord, source: RecordSource, store: &RecordStore) -> bool {
    record
        .refs
        .iter()
        .any(|r| r.source == source && store.contains(source, &r.id))
}

// Group index of an id inside the advisory's positional groups.
fn group_of(adv: &VulnRecord, wanted: &RefId) -> Option<usize> {
    adv.advisory_positions
        .as_ref()?
        .iter()
        .position(|group| group.contains(wanted))
}

// A bug and a TADV entry cluster inside an advisory when both appear in its
// positional groups at a distance of at most one group. Advisories without
// position data never cluster.
fn cluster(adv: &VulnRecord, bug_id: &str, tadv_id: &str) -> bool {
    let bug = RefId::new(RecordSource::Bug, bug_id);
    let tadv = RefId::new(RecordSource::Tadv, tadv_id);
    match (group_of(adv, &bug), group_of(adv, &tadv)) {
        (Some(b), Some(t)) => b.abs_diff(t) <= 1,
        _ => false,
    }
}

/// Entry ids of `dataset` for `release`, per the join definitions above.
///
/// An empty result is valid. References to entries that are not present in
/// the store do not satisfy the existence quantifiers.
pub fn build_dataset(store: &RecordStore, dataset: DataSetId, release: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    match dataset {
        DataSetId::Nvd => {
            for nvd in store.by_source(RecordSource::Tadv) {
                if claims_release(nvd, release) {
                    out.insert(nvd.id.clone());
                }
            }
        }
        DataSetId::NvdBug => {
            for nvd in store.by_source(RecordSource::Tadv) {
                if claims_release(nvd, release) && refs_existing(nvd, RecordSource::Bug, store) {
                    out.insert(nvd.id.clone());
                }
            }
        }
        DataSetId::NvdAdvice => {
            for nvd in store.by_source(RecordSource::Tadv) {
                if claims_release(nvd, release) && refs_existing(nvd, RecordSource::Adv, store) {
                    out.insert(nvd.id.clone());
                }
            }
        }
        DataSetId::NvdNBug => {
            for nvd in store.by_source(RecordSource::Tadv) {
                if !claims_release(nvd, release) {
                    continue;
                }
                for reference in &nvd.refs {
                    if reference.source == RecordSource::Bug
                        && store.contains(RecordSource::Bug, &reference.id)
                    {
                        out.insert(reference.id.clone());
                    }
                }
            }
        }
        DataSetId::AdviceNBug => {
            for adv in store.by_source(RecordSource::Adv) {
                for bug_ref in adv.refs.iter().filter(|r| r.source == RecordSource::Bug) {
                    if !store.contains(RecordSource::Bug, &bug_ref.id) {
                        continue;
                    }
                    let confirmed = adv
                        .refs
                        .iter()
                        .filter(|r| r.source == RecordSource::Tadv)
                        .any(|tadv_ref| {
                            store
                                .get(RecordSource::Tadv, &tadv_ref.id)
                                .is_some_and(|nvd| claims_release(nvd, release))
                                && cluster(adv, &bug_ref.id, &tadv_ref.id)
                        });
                    if confirmed {
                        out.insert(bug_ref.id.clone());
                    }
                }
            }
        }
    }
    out
}

/// Disclosure dates of the data set's entries, for sample extraction.
pub fn dataset_entry_dates(
    store: &RecordStore,
    dataset: DataSetId,
    release: &str,
) -> Vec<NaiveDate> {
    let source = dataset.entry_source();
    build_dataset(store, dataset, release)
        .iter()
        .filter_map(|id| store.get(source, id).map(|r| r.date))
        .collect()
}
