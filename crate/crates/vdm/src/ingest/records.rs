//! Record and manifest file loading.
//!
//! Two on-disk formats are supported. CSV files carry one record per row
//! with the columns `source,id,date,releases,refs,advisory_positions`:
//! `releases` is a `;`-separated list of release identifiers, `refs` a
//! `;`-separated list of `SOURCE:id` pairs, and `advisory_positions` an
//! optional `|`-separated list of reference groups (members `,`-separated,
//! in advisory order). JSON files carry an array of objects with the same
//! fields as native lists.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Deserialize;

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordSource {
    /// Third-party advisory database (e.g. an NVD entry).
    Tadv,
    /// Vendor advisory (e.g. an MFSA report).
    Adv,
    /// Vendor bug tracker entry.
    Bug,
}

impl RecordSource {
    pub fn name(self) -> &'static str {
        match self {
            RecordSource::Tadv => "TADV",
            RecordSource::Adv => "ADV",
            RecordSource::Bug => "BUG",
        }
    }
}

impl fmt::Display for RecordSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RecordSource {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TADV" => Ok(RecordSource::Tadv),
            "ADV" => Ok(RecordSource::Adv),
            "BUG" => Ok(RecordSource::Bug),
            _ => Err(()),
        }
    }
}

/// A source-qualified entry identifier, e.g. `BUG:744541`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RefId {
    pub source: RecordSource,
    pub id: String,
}

impl RefId {
    pub fn new(source: RecordSource, id: impl Into<String>) -> Self {
        RefId { source, id: id.into() }
    }
}

impl fmt::Display for RefId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.source, self.id)
    }
}

/// One vulnerability entry from a source database.
#[derive(Debug, Clone)]
pub struct VulnRecord {
    pub source: RecordSource,
    pub id: String,
    /// Disclosure date (the date the entry was reported to its database).
    pub date: NaiveDate,
    /// Releases the entry claims vulnerable; usually empty for ADV/BUG.
    pub releases: BTreeSet<String>,
    /// Cross-references to entries in other databases.
    pub refs: BTreeSet<RefId>,
    /// For advisories: the referenced ids grouped by their position in the
    /// report, in order. Drives the Advice.NBug clustering predicate.
    pub advisory_positions: Option<Vec<Vec<RefId>>>,
}

impl VulnRecord {
    pub fn key(&self) -> (RecordSource, String) {
        (self.source, self.id.clone())
    }
}

/// Immutable, indexed collection of loaded records.
#[derive(Debug, Default)]
pub struct RecordStore {
    records: Vec<VulnRecord>,
}

impl RecordStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a store, rejecting duplicate (source, id) pairs and records
    /// that reference themselves.
    pub fn from_records(records: Vec<VulnRecord>) -> Result<Self, IngestError> {
        let mut store = RecordStore::new();
        for (i, record) in records.into_iter().enumerate() {
            store.insert(record, &format!("record {}", i + 1))?;
        }
        Ok(store)
    }

    fn insert(&mut self, record: VulnRecord, location: &str) -> Result<(), IngestError> {
        if record.id.is_empty() {
            return Err(IngestError::Parse {
                location: location.to_string(),
                message: "record id must not be empty".to_string(),
            });
        }
        let own = RefId::new(record.source, record.id.clone());
        if record.refs.contains(&own) {
            return Err(IngestError::Parse {
                location: location.to_string(),
                message: format!("record {own} references itself"),
            });
        }
        if self.get(record.source, &record.id).is_some() {
            return Err(IngestError::DuplicateId {
                location: location.to_string(),
                record_source: record.source,
                id: record.id,
            });
        }
        self.records.push(record);
        Ok(())
    }

    pub fn get(&self, source: RecordSource, id: &str) -> Option<&VulnRecord> {
        self.records
            .iter()
            .find(|r| r.source == source && r.id == id)
    }

    pub fn contains(&self, source: RecordSource, id: &str) -> bool {
        self.get(source, id).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &VulnRecord> {
        self.records.iter()
    }

    pub fn by_source(&self, source: RecordSource) -> impl Iterator<Item = &VulnRecord> {
        self.records.iter().filter(move |r| r.source == source)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// On-disk record file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Csv,
    Json,
}

impl RecordFormat {
    /// Guesses the format from a file extension; defaults to CSV.
    pub fn from_path(path: &Path) -> RecordFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => RecordFormat::Json,
            _ => RecordFormat::Csv,
        }
    }
}

impl FromStr for RecordFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(RecordFormat::Csv),
            "json" => Ok(RecordFormat::Json),
            other => Err(format!("unknown record format \"{other}\"")),
        }
    }
}

// Unvalidated row shared by both formats.
#[derive(Debug, Deserialize)]
struct RawRecord {
    source: String,
    id: String,
    date: String,
    #[serde(default)]
    releases: Vec<String>,
    #[serde(default)]
    refs: Vec<String>,
    #[serde(default)]
    advisory_positions: Option<Vec<Vec<String>>>,
}

fn parse_ref(token: &str, location: &str) -> Result<RefId, IngestError> {
    let (source, id) = token.split_once(':').ok_or_else(|| IngestError::Parse {
        location: location.to_string(),
        message: format!("reference \"{token}\" is not of the form SOURCE:id"),
    })?;
    let source = source.parse().map_err(|()| IngestError::UnknownSource {
        location: location.to_string(),
        name: source.to_string(),
    })?;
    if id.is_empty() {
        return Err(IngestError::Parse {
            location: location.to_string(),
            message: format!("reference \"{token}\" has an empty id"),
        });
    }
    Ok(RefId::new(source, id.to_string()))
}

fn validate(raw: RawRecord, location: &str) -> Result<VulnRecord, IngestError> {
    let source: RecordSource = raw.source.parse().map_err(|()| IngestError::UnknownSource {
        location: location.to_string(),
        name: raw.source.clone(),
    })?;
    // records without a parseable date are rejected, not dropped: silently
    // dropping them would bias the cumulative counts
    let date: NaiveDate = raw.date.parse().map_err(|e| IngestError::Parse {
        location: location.to_string(),
        message: format!("invalid date \"{}\": {e}", raw.date),
    })?;
    let releases: BTreeSet<String> = raw
        .releases
        .into_iter()
        .filter(|r| !r.is_empty())
        .collect();
    let mut refs = BTreeSet::new();
    for token in &raw.refs {
        refs.insert(parse_ref(token, location)?);
    }
    let advisory_positions = match raw.advisory_positions {
        None => None,
        Some(groups) => {
            let mut parsed = Vec::with_capacity(groups.len());
            for group in groups {
                let mut members = Vec::with_capacity(group.len());
                for token in &group {
                    members.push(parse_ref(token, location)?);
                }
                parsed.push(members);
            }
            Some(parsed)
        }
    };
    Ok(VulnRecord {
        source,
        id: raw.id,
        date,
        releases,
        refs,
        advisory_positions,
    })
}

fn split_list(field: &str, separator: char) -> Vec<String> {
    if field.trim().is_empty() {
        Vec::new()
    } else {
        field.split(separator).map(|s| s.trim().to_string()).collect()
    }
}

/// Loads and validates a record file. Any malformed row fails the whole
/// load, with the row named in the error.
pub fn load_records(path: &Path, format: RecordFormat) -> Result<RecordStore, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_records_from_reader(file, format, &path.display().to_string())
}

/// [`load_records`] over any reader; `origin` names the input in errors.
pub fn load_records_from_reader(
    reader: impl Read,
    format: RecordFormat,
    origin: &str,
) -> Result<RecordStore, IngestError> {
    match format {
        RecordFormat::Csv => load_csv(reader, origin),
        RecordFormat::Json => load_json(reader, origin),
    }
}

fn load_csv(reader: impl Read, origin: &str) -> Result<RecordStore, IngestError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(reader);
    let mut store = RecordStore::new();
    for row in csv_reader.deserialize::<CsvRecordRow>().enumerate() {
        let (index, row) = row;
        let location = format!("{origin}: row {}", index + 1);
        let row = row.map_err(|e| IngestError::Parse {
            location: location.clone(),
            message: e.to_string(),
        })?;
        let raw = RawRecord {
            source: row.source,
            id: row.id,
            date: row.date,
            releases: split_list(&row.releases, ';'),
            refs: split_list(&row.refs, ';'),
            advisory_positions: parse_position_field(&row.advisory_positions),
        };
        let record = validate(raw, &location)?;
        store.insert(record, &location)?;
    }
    Ok(store)
}

#[derive(Debug, Deserialize)]
struct CsvRecordRow {
    source: String,
    id: String,
    date: String,
    #[serde(default)]
    releases: String,
    #[serde(default)]
    refs: String,
    #[serde(default)]
    advisory_positions: String,
}

fn parse_position_field(field: &str) -> Option<Vec<Vec<String>>> {
    if field.trim().is_empty() {
        return None;
    }
    Some(
        field
            .split('|')
            .map(|group| split_list(group, ','))
            .collect(),
    )
}

fn load_json(mut reader: impl Read, origin: &str) -> Result<RecordStore, IngestError> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|source| IngestError::Io {
        path: origin.to_string(),
        source,
    })?;
    if text.trim().is_empty() {
        return Ok(RecordStore::new());
    }
    let raws: Vec<RawRecord> = serde_json::from_str(&text).map_err(|e| IngestError::Parse {
        location: origin.to_string(),
        message: e.to_string(),
    })?;
    let mut store = RecordStore::new();
    for (index, raw) in raws.into_iter().enumerate() {
        let location = format!("{origin}: record {}", index + 1);
        let record = validate(raw, &location)?;
        store.insert(record, &location)?;
    }
    Ok(store)
}

/// Release metadata: when it shipped and what it is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseInfo {
    pub date: NaiveDate,
    pub product: String,
    pub version: String,
}

/// Maps release identifiers to their metadata.
#[derive(Debug, Default, Clone)]
pub struct ReleaseManifest {
    entries: std::collections::BTreeMap<String, ReleaseInfo>,
}

impl ReleaseManifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, release: impl Into<String>, info: ReleaseInfo) {
        self.entries.insert(release.into(), info);
    }

    pub fn get(&self, release: &str) -> Option<&ReleaseInfo> {
        self.entries.get(release)
    }

    pub fn releases(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ReleaseInfo)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Deserialize)]
struct CsvManifestRow {
    release: String,
    date: String,
    #[serde(default)]
    product: String,
    #[serde(default)]
    version: String,
}

/// Loads a release manifest (CSV columns `release,date,product,version`).
pub fn load_manifest(path: &Path) -> Result<ReleaseManifest, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut csv_reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    let mut manifest = ReleaseManifest::new();
    for (index, row) in csv_reader.deserialize::<CsvManifestRow>().enumerate() {
        let location = format!("{}: row {}", path.display(), index + 1);
        let row = row.map_err(|e| IngestError::Parse {
            location: location.clone(),
            message: e.to_string(),
        })?;
        if row.release.is_empty() {
            return Err(IngestError::Parse {
                location,
                message: "release identifier must not be empty".to_string(),
            });
        }
        let date: NaiveDate = row.date.parse().map_err(|e| IngestError::Parse {
            location: location.clone(),
            message: format!("invalid date \"{}\": {e}", row.date),
        })?;
        if manifest.get(&row.release).is_some() {
            return Err(IngestError::Parse {
                location,
                message: format!("duplicate release \"{}\"", row.release),
            });
        }
        manifest.insert(
            row.release,
            ReleaseInfo {
                date,
                product: row.product,
                version: row.version,
            },
        );
    }
    Ok(manifest)
}
