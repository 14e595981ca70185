//! Observed samples: monthly cumulative counts per (release, data set, horizon).
//!
//! Month `m` covers the interval `(release + (m-1) months, release + m months]`
//! with calendar-month arithmetic and end-of-month clamping; an entry dated
//! exactly on a boundary lands in the earlier month.

use std::collections::BTreeMap;

use chrono::{Months, NaiveDate};

use super::datasets::{dataset_entry_dates, DataSetId};
use super::records::{RecordStore, ReleaseManifest};
use super::IngestError;

/// Minimum horizon: the shortest sample that can fit every model family.
pub const TAU_MIN: u32 = 6;

/// Identifies an observed sample: release, data set, and horizon in months.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SampleKey {
    pub release: String,
    pub dataset: DataSetId,
    pub horizon: u32,
}

impl SampleKey {
    pub fn new(release: impl Into<String>, dataset: DataSetId, horizon: u32) -> Self {
        SampleKey {
            release: release.into(),
            dataset,
            horizon,
        }
    }
}

impl std::fmt::Display for SampleKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.release, self.dataset, self.horizon)
    }
}

/// Monthly cumulative vulnerability counts for months `1..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedSample {
    release: String,
    dataset: DataSetId,
    counts: Vec<u32>,
}

impl ObservedSample {
    /// Validates the horizon minimum and that counts are nondecreasing.
    pub fn new(
        release: impl Into<String>,
        dataset: DataSetId,
        counts: Vec<u32>,
    ) -> Result<Self, IngestError> {
        if (counts.len() as u32) < TAU_MIN {
            return Err(IngestError::HorizonBelowMinimum {
                horizon: counts.len() as u32,
                min: TAU_MIN,
            });
        }
        for (i, pair) in counts.windows(2).enumerate() {
            if pair[1] < pair[0] {
                return Err(IngestError::NotCumulative {
                    month: i + 2,
                    previous: pair[0],
                    value: pair[1],
                });
            }
        }
        Ok(ObservedSample {
            release: release.into(),
            dataset,
            counts,
        })
    }

    pub fn release(&self) -> &str {
        &self.release
    }

    pub fn dataset(&self) -> DataSetId {
        self.dataset
    }

    pub fn horizon(&self) -> u32 {
        self.counts.len() as u32
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    pub fn key(&self) -> SampleKey {
        SampleKey::new(self.release.clone(), self.dataset, self.horizon())
    }

    /// The same sample truncated to a shorter horizon.
    pub fn prefix(&self, horizon: u32) -> Result<ObservedSample, IngestError> {
        if horizon > self.horizon() {
            return Err(IngestError::HorizonBelowMinimum {
                horizon,
                min: TAU_MIN,
            });
        }
        ObservedSample::new(
            self.release.clone(),
            self.dataset,
            self.counts[..horizon as usize].to_vec(),
        )
    }
}

/// Deterministically ordered collection of observed samples.
#[derive(Debug, Default, Clone)]
pub struct SampleSet {
    inner: BTreeMap<SampleKey, ObservedSample>,
}

impl SampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sample: ObservedSample) -> Option<ObservedSample> {
        self.inner.insert(sample.key(), sample)
    }

    pub fn get(&self, key: &SampleKey) -> Option<&ObservedSample> {
        self.inner.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ObservedSample> {
        self.inner.values()
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }
}

impl FromIterator<ObservedSample> for SampleSet {
    fn from_iter<I: IntoIterator<Item = ObservedSample>>(iter: I) -> Self {
        let mut set = SampleSet::new();
        for sample in iter {
            set.insert(sample);
        }
        set
    }
}

/// `date + m` calendar months, clamping to the end of shorter months.
pub fn add_months(date: NaiveDate, m: u32) -> NaiveDate {
    date.checked_add_months(Months::new(m))
        .expect("month arithmetic stays within representable dates")
}

/// Whole calendar months elapsed from `from` to `to` (0 if `to` precedes it).
pub fn months_between(from: NaiveDate, to: NaiveDate) -> u32 {
    use chrono::Datelike;
    if to <= from {
        return 0;
    }
    let rough = (to.year() - from.year()) * 12 + to.month() as i32 - from.month() as i32;
    let mut m = rough.max(0) as u32;
    while add_months(from, m) > to {
        m -= 1;
    }
    m
}

// Full per-month cumulative series up to `horizon` months after release.
fn cumulative_counts(dates: &[NaiveDate], release_date: NaiveDate, horizon: u32) -> Vec<u32> {
    let boundaries: Vec<NaiveDate> = (0..=horizon).map(|m| add_months(release_date, m)).collect();
    let mut monthly = vec![0u32; horizon as usize];
    for &d in dates {
        if d <= boundaries[0] || d > boundaries[horizon as usize] {
            continue;
        }
        // first month whose upper boundary is on or after the date
        let month = boundaries.partition_point(|&b| b < d);
        monthly[month - 1] += 1;
    }
    let mut total = 0;
    for slot in &mut monthly {
        total += *slot;
        *slot = total;
    }
    monthly
}

/// Buckets entry dates into the monthly cumulative sample for one horizon.
///
/// Entries dated on or before the release date, or after the horizon, are
/// excluded.
pub fn extract_sample(
    release: &str,
    dataset: DataSetId,
    dates: &[NaiveDate],
    release_date: NaiveDate,
    horizon: u32,
) -> Result<ObservedSample, IngestError> {
    if horizon < TAU_MIN {
        return Err(IngestError::HorizonBelowMinimum {
            horizon,
            min: TAU_MIN,
        });
    }
    ObservedSample::new(release, dataset, cumulative_counts(dates, release_date, horizon))
}

/// A release that produced no samples, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRelease {
    pub release: String,
    pub reason: String,
}

/// Result of enumerating samples over a corpus.
#[derive(Debug, Default)]
pub struct SampleEnumeration {
    pub samples: SampleSet,
    pub skipped: Vec<SkippedRelease>,
}

/// Enumerates one sample per (release, data set, horizon) with horizons
/// `tau_min..=tau_max(release)`, where `tau_max` is the number of whole
/// months between the release date and `collection_date`.
///
/// Releases younger than `tau_min` yield no samples and are reported in
/// [`SampleEnumeration::skipped`]. A missing manifest entry is an error.
pub fn enumerate_samples(
    store: &RecordStore,
    manifest: &ReleaseManifest,
    releases: &[String],
    datasets: &[DataSetId],
    collection_date: NaiveDate,
    tau_min: u32,
) -> Result<SampleEnumeration, IngestError> {
    let tau_min = tau_min.max(TAU_MIN);
    let mut out = SampleEnumeration::default();
    for release in releases {
        let info = manifest
            .get(release)
            .ok_or_else(|| IngestError::MissingReleaseDate {
                release: release.clone(),
            })?;
        let tau_max = months_between(info.date, collection_date);
        if tau_max < tau_min {
            out.skipped.push(SkippedRelease {
                release: release.clone(),
                reason: format!(
                    "only {tau_max} whole months between release and collection (need {tau_min})"
                ),
            });
            continue;
        }
        for &dataset in datasets {
            let dates = dataset_entry_dates(store, dataset, release);
            let full = cumulative_counts(&dates, info.date, tau_max);
            for tau in tau_min..=tau_max {
                let counts = full[..tau as usize].to_vec();
                out.samples
                    .insert(ObservedSample::new(release.clone(), dataset, counts)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::records::{RecordSource, ReleaseInfo};

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn month_arithmetic_clamps_to_month_end() {
        assert_eq!(add_months(date("2012-01-31"), 1), date("2012-02-29"));
        assert_eq!(add_months(date("2011-01-31"), 1), date("2011-02-28"));
        assert_eq!(add_months(date("2010-03-15"), 12), date("2011-03-15"));
    }

    #[test]
    fn whole_months_between_dates() {
        assert_eq!(months_between(date("2010-01-15"), date("2010-01-14")), 0);
        assert_eq!(months_between(date("2010-01-15"), date("2010-02-14")), 0);
        assert_eq!(months_between(date("2010-01-15"), date("2010-02-15")), 1);
        assert_eq!(months_between(date("2010-01-31"), date("2010-02-28")), 1);
        assert_eq!(months_between(date("2010-01-15"), date("2011-01-14")), 11);
        assert_eq!(months_between(date("1997-05-01"), date("2012-07-01")), 182);
    }

    #[test]
    fn no_entries_gives_all_zeros() {
        let s = extract_sample("P1.0", DataSetId::Nvd, &[], date("2010-01-15"), 6).unwrap();
        assert_eq!(s.counts(), &[0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn entry_45_days_after_release_lands_in_month_two() {
        let dates = [date("2010-03-01")]; // release + 45 days
        let s = extract_sample("P1.0", DataSetId::Nvd, &dates, date("2010-01-15"), 6).unwrap();
        assert_eq!(s.counts(), &[0, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn boundary_dates_land_in_the_earlier_month() {
        let release = date("2010-01-15");
        // exactly one month after release: still month 1
        let s = extract_sample("P1.0", DataSetId::Nvd, &[date("2010-02-15")], release, 6).unwrap();
        assert_eq!(s.counts(), &[1, 1, 1, 1, 1, 1]);
        // one day later: month 2
        let s = extract_sample("P1.0", DataSetId::Nvd, &[date("2010-02-16")], release, 6).unwrap();
        assert_eq!(s.counts(), &[0, 1, 1, 1, 1, 1]);
        // on the release date itself: excluded
        let s = extract_sample("P1.0", DataSetId::Nvd, &[release], release, 6).unwrap();
        assert_eq!(s.counts(), &[0; 6]);
        // past the horizon: excluded
        let s = extract_sample("P1.0", DataSetId::Nvd, &[date("2011-01-01")], release, 6).unwrap();
        assert_eq!(s.counts(), &[0; 6]);
    }

    #[test]
    fn horizon_below_minimum_is_rejected() {
        let err = extract_sample("P1.0", DataSetId::Nvd, &[], date("2010-01-15"), 5).unwrap_err();
        assert!(matches!(err, IngestError::HorizonBelowMinimum { horizon: 5, min: 6 }));
    }

    #[test]
    fn sample_validation() {
        assert!(ObservedSample::new("r", DataSetId::Nvd, vec![0, 1, 2, 3, 4]).is_err());
        assert!(matches!(
            ObservedSample::new("r", DataSetId::Nvd, vec![0, 2, 1, 3, 4, 5]),
            Err(IngestError::NotCumulative { month: 3, .. })
        ));
        let s = ObservedSample::new("r", DataSetId::Nvd, vec![0, 1, 1, 2, 3, 5]).unwrap();
        assert_eq!(s.horizon(), 6);
    }

    fn manifest_with(release: &str, d: &str) -> ReleaseManifest {
        let mut m = ReleaseManifest::new();
        m.insert(
            release,
            ReleaseInfo {
                date: date(d),
                product: "P".to_string(),
                version: "1.0".to_string(),
            },
        );
        m
    }

    #[test]
    fn ten_month_old_release_has_five_samples() {
        let store = RecordStore::new();
        let manifest = manifest_with("P1.0", "2011-09-01");
        let result = enumerate_samples(
            &store,
            &manifest,
            &["P1.0".to_string()],
            &[DataSetId::Nvd],
            date("2012-07-01"),
            TAU_MIN,
        )
        .unwrap();
        assert_eq!(result.samples.len(), 5); // horizons 6..=10
        assert!(result.skipped.is_empty());
    }

    #[test]
    fn young_release_is_skipped_with_a_warning() {
        let store = RecordStore::new();
        let manifest = manifest_with("P1.0", "2012-03-01");
        let result = enumerate_samples(
            &store,
            &manifest,
            &["P1.0".to_string()],
            &[DataSetId::Nvd],
            date("2012-07-01"),
            TAU_MIN,
        )
        .unwrap();
        assert!(result.samples.is_empty());
        assert_eq!(result.skipped.len(), 1);
        assert_eq!(result.skipped[0].release, "P1.0");
    }

    #[test]
    fn missing_release_date_is_an_error() {
        let store = RecordStore::new();
        let manifest = ReleaseManifest::new();
        let err = enumerate_samples(
            &store,
            &manifest,
            &["P1.0".to_string()],
            &[DataSetId::Nvd],
            date("2012-07-01"),
            TAU_MIN,
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::MissingReleaseDate { .. }));
    }

    #[test]
    fn a_release_182_months_old_has_177_samples_per_dataset() {
        let store = RecordStore::new();
        let manifest = manifest_with("IE4.0", "1997-05-01");
        let result = enumerate_samples(
            &store,
            &manifest,
            &["IE4.0".to_string()],
            &[DataSetId::Nvd],
            date("2012-07-01"),
            TAU_MIN,
        )
        .unwrap();
        assert_eq!(result.samples.len(), 177); // tau_max - 5 horizons
    }

    #[test]
    fn sample_count_matches_horizon_arithmetic() {
        let store = RecordStore::new();
        let mut manifest = ReleaseManifest::new();
        let releases = [("A", "2008-01-15"), ("B", "2009-06-10"), ("C", "2010-11-30")];
        for (name, d) in releases {
            manifest.insert(
                name,
                ReleaseInfo {
                    date: date(d),
                    product: name.to_string(),
                    version: "1.0".to_string(),
                },
            );
        }
        let collection = date("2012-01-01");
        let names: Vec<String> = releases.iter().map(|(n, _)| n.to_string()).collect();
        let datasets = [DataSetId::Nvd, DataSetId::NvdBug];
        let result =
            enumerate_samples(&store, &manifest, &names, &datasets, collection, TAU_MIN).unwrap();
        let expected: usize = releases
            .iter()
            .map(|(_, d)| {
                let tau_max = months_between(date(d), collection);
                (tau_max.saturating_sub(5)) as usize * datasets.len()
            })
            .sum();
        assert_eq!(result.samples.len(), expected);
    }

    #[test]
    fn each_sample_is_a_prefix_of_the_next_horizon() {
        let mut store_records = Vec::new();
        for (i, d) in ["2010-02-01", "2010-02-20", "2010-05-02", "2010-09-30", "2011-01-10"]
            .iter()
            .enumerate()
        {
            store_records.push(crate::ingest::VulnRecord {
                source: RecordSource::Tadv,
                id: format!("CVE-{i}"),
                date: date(d),
                releases: ["P1.0".to_string()].into_iter().collect(),
                refs: Default::default(),
                advisory_positions: None,
            });
        }
        let store = RecordStore::from_records(store_records).unwrap();
        let manifest = manifest_with("P1.0", "2010-01-15");
        let result = enumerate_samples(
            &store,
            &manifest,
            &["P1.0".to_string()],
            &[DataSetId::Nvd],
            date("2011-06-15"),
            TAU_MIN,
        )
        .unwrap();
        for tau in TAU_MIN..17 {
            let shorter = result
                .samples
                .get(&SampleKey::new("P1.0", DataSetId::Nvd, tau))
                .unwrap();
            let longer = result
                .samples
                .get(&SampleKey::new("P1.0", DataSetId::Nvd, tau + 1))
                .unwrap();
            assert_eq!(shorter.counts(), &longer.counts()[..tau as usize]);
        }
    }
}
