//! Time-stamped feature store.
//!
//! One writer appends to an NDJSON log and then publishes a new immutable
//! [`StoreSnapshot`]; readers grab the current snapshot and never see a
//! partial batch. Ids are assigned densely from 1 and never reused.

mod feature;
mod index;
mod log;
mod overlaps;

use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

pub use self::log::{read_log, LogRecord};
pub use feature::{
    feature_from_geojson, geometry_from_geojson, geometry_to_geojson, parse_documents, validate_geometry,
    DocumentError, Feature, FeatureDraft, FeatureKind,
};
pub use index::{GridIndex, CELL_SIZE_M};
pub use overlaps::{check_overlaps, OverlapConflict, OVERLAP_EPSILON_M2};

use self::log::LogWriter;
use crate::geo::GeoBounds;
use crate::time::Date;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{} invalid document(s): {}", .0.len(), join(.0))]
    Validation(Vec<DocumentError>),
    #[error("feature {0} not found")]
    NotFound(u64),
    #[error("feature {id} is a {kind}, not a building")]
    Kind { id: u64, kind: FeatureKind },
    #[error("corrupt log at line {line}: {message}")]
    Log { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(errs: &[DocumentError]) -> String {
    errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Immutable view of the store at one version.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StoreSnapshot {
    version: u64,
    // slot i holds the feature with id i + 1
    features: Vec<Arc<Feature>>,
    bounds: Vec<GeoBounds<f64>>,
    index: GridIndex,
}

impl StoreSnapshot {
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Arc<Feature>] {
        &self.features
    }

    pub fn get(&self, id: u64) -> Option<&Arc<Feature>> {
        id.checked_sub(1).and_then(|i| self.features.get(i as usize))
    }

    pub(crate) fn bounds_of(&self, slot: usize) -> GeoBounds<f64> {
        self.bounds[slot]
    }

    pub(crate) fn candidate_slots(&self, b: &GeoBounds<f64>) -> Vec<u32> {
        self.index
            .candidates(b)
            .unwrap_or_else(|| (0..self.features.len() as u32).collect())
    }

    fn matches(&self, slot: usize, bbox: &GeoBounds<f64>, at: Option<Date>) -> bool {
        self.bounds[slot].intersects(bbox) && at.is_none_or(|d| self.features[slot].span.contains(d))
    }

    /// Features whose bounding box meets `bbox` (closed test) and, with
    /// `at`, that exist on that date. Sorted by id.
    pub fn query(&self, bbox: &GeoBounds<f64>, at: Option<Date>) -> Vec<Arc<Feature>> {
        self.candidate_slots(bbox)
            .into_iter()
            .map(|s| s as usize)
            .filter(|&s| self.matches(s, bbox, at))
            .map(|s| self.features[s].clone())
            .collect()
    }

    /// Linear-scan reference implementation of [`query`](Self::query).
    pub fn query_brute_force(&self, bbox: &GeoBounds<f64>, at: Option<Date>) -> Vec<Arc<Feature>> {
        (0..self.features.len())
            .filter(|&s| self.matches(s, bbox, at))
            .map(|s| self.features[s].clone())
            .collect()
    }

    fn push(&mut self, f: Feature) {
        let slot = self.features.len() as u32;
        let b = f.bounds();
        self.index.insert(slot, &b);
        self.bounds.push(b);
        self.features.push(Arc::new(f));
    }

    fn apply(&mut self, rec: &LogRecord, line: usize) -> Result<(), StoreError> {
        let corrupt = |message: String| StoreError::Log { line, message };
        match rec {
            LogRecord::Ingest { features } => {
                for doc in features {
                    let draft = feature_from_geojson(doc).map_err(corrupt)?;
                    let id = doc.get("id").and_then(|v| v.as_u64()).ok_or_else(|| corrupt("missing id".into()))?;
                    if id != self.features.len() as u64 + 1 {
                        return Err(corrupt(format!("id {id} out of sequence")));
                    }
                    self.push(draft.with_id(id));
                }
            }
            LogRecord::Link { feature_id, model_id } => {
                self.set_model(*feature_id, *model_id).map_err(|e| corrupt(e.to_string()))?;
            }
        }
        self.version += 1;
        Ok(())
    }

    fn set_model(&mut self, feature_id: u64, model_id: u64) -> Result<Feature, StoreError> {
        let slot = feature_id
            .checked_sub(1)
            .filter(|&i| (i as usize) < self.features.len())
            .ok_or(StoreError::NotFound(feature_id))? as usize;
        let f = &self.features[slot];
        if f.kind != FeatureKind::Building {
            return Err(StoreError::Kind {
                id: feature_id,
                kind: f.kind,
            });
        }
        let mut updated = (**f).clone();
        updated.properties.insert("model_id".into(), model_id.to_string());
        self.features[slot] = Arc::new(updated.clone());
        Ok(updated)
    }
}

/// Feature store with optional on-disk log.
#[derive(Debug, Default)]
pub struct Store {
    writer: Mutex<Option<LogWriter>>,
    current: RwLock<Arc<StoreSnapshot>>,
}

impl Store {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) a log file and replays it.
    pub fn open(log_path: &Path) -> Result<Self, StoreError> {
        let (records, valid_len) = read_log(log_path)?;
        let snap = replay(&records)?;
        let writer = LogWriter::open(log_path, valid_len)?;
        Ok(Self {
            writer: Mutex::new(Some(writer)),
            current: RwLock::new(Arc::new(snap)),
        })
    }

    pub fn snapshot(&self) -> Arc<StoreSnapshot> {
        self.current.read().expect("snapshot lock poisoned").clone()
    }

    /// Logs and publishes a batch; all-or-nothing. Empty batches are no-ops.
    pub fn ingest(&self, drafts: Vec<FeatureDraft>) -> Result<Vec<u64>, StoreError> {
        let errors: Vec<DocumentError> = drafts
            .iter()
            .enumerate()
            .filter_map(|(index, d)| d.validate().err().map(|message| DocumentError { index, message }))
            .collect();
        if !errors.is_empty() {
            return Err(StoreError::Validation(errors));
        }
        if drafts.is_empty() {
            return Ok(Vec::new());
        }
        let mut writer = self.writer.lock().expect("writer lock poisoned");
        let mut next = (*self.snapshot()).clone();
        let first = next.features.len() as u64 + 1;
        let features: Vec<Feature> = drafts
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.with_id(first + i as u64))
            .collect();
        if let Some(w) = writer.as_mut() {
            w.append(&LogRecord::Ingest {
                features: features.iter().map(Feature::to_geojson).collect(),
            })?;
        }
        let ids = features.iter().map(|f| f.id).collect();
        for f in features {
            next.push(f);
        }
        next.version += 1;
        *self.current.write().expect("snapshot lock poisoned") = Arc::new(next);
        Ok(ids)
    }

    /// Parses a GeoJSON Feature / FeatureCollection and ingests it.
    pub fn ingest_json(&self, doc: &serde_json::Value) -> Result<Vec<u64>, StoreError> {
        let drafts = parse_documents(doc).map_err(StoreError::Validation)?;
        self.ingest(drafts)
    }

    /// Sets `model_id` on a building; the last link wins.
    pub fn link_model(&self, feature_id: u64, model_id: u64) -> Result<Feature, StoreError> {
        let mut writer = self.writer.lock().expect("writer lock poisoned");
        let mut next = (*self.snapshot()).clone();
        let updated = next.set_model(feature_id, model_id)?;
        if let Some(w) = writer.as_mut() {
            w.append(&LogRecord::Link { feature_id, model_id })?;
        }
        next.version += 1;
        *self.current.write().expect("snapshot lock poisoned") = Arc::new(next);
        Ok(updated)
    }
}

/// Rebuilds a snapshot from log records.
pub fn replay(records: &[LogRecord]) -> Result<StoreSnapshot, StoreError> {
    let mut snap = StoreSnapshot::default();
    for (i, rec) in records.iter().enumerate() {
        snap.apply(rec, i + 1)?;
    }
    Ok(snap)
}
