//! Content-addressed GLB repository with a JSON index.
//!
//! Blobs live at `<dir>/<sha256>.glb`; `<dir>/index.json` lists every
//! record. Blobs are immutable: identical uploads share one file but get
//! distinct model ids.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use timeatlas_core::reconstruct::parse_glb;
use timeatlas_core::{Date, TimeSpan};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("not a GLB: {0}")]
    InvalidGlb(String),
    #[error("model {0} not found")]
    NotFound(u64),
    #[error("invalid metadata: {0}")]
    Metadata(String),
    #[error("blob for model {id} does not match its hash")]
    Corrupt { id: u64 },
    #[error("model index {path}: {message}")]
    Index { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Metadata supplied with an upload.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_date: Option<Date>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_date: Option<Date>,
}

impl ModelMetadata {
    /// The existence span, when a start date is given.
    pub fn span(&self) -> Result<Option<TimeSpan>, ModelError> {
        match (self.start_date, self.end_date) {
            (None, None) => Ok(None),
            (None, Some(_)) => Err(ModelError::Metadata("end_date given without start_date".into())),
            (Some(s), e) => TimeSpan::new(s, e).map(Some).map_err(|e| ModelError::Metadata(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub model_id: u64,
    #[serde(flatten)]
    pub metadata: ModelMetadata,
    /// Lowercase hex SHA-256 of the blob.
    pub sha256: String,
    pub size: u64,
}

pub struct ModelRepo {
    dir: PathBuf,
    records: RwLock<BTreeMap<u64, ModelRecord>>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a temporary sibling and a rename, so
/// readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    std::fs::rename(&tmp, path)
}

impl ModelRepo {
    pub fn open(dir: &Path) -> Result<Self, ModelError> {
        std::fs::create_dir_all(dir)?;
        let index = dir.join("index.json");
        let records = match std::fs::read(&index) {
            Ok(bytes) => {
                let list: Vec<ModelRecord> = serde_json::from_slice(&bytes).map_err(|e| ModelError::Index {
                    path: index.clone(),
                    message: e.to_string(),
                })?;
                list.into_iter().map(|r| (r.model_id, r)).collect()
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            dir: dir.to_path_buf(),
            records: RwLock::new(records),
        })
    }

    fn blob_path(&self, sha: &str) -> PathBuf {
        self.dir.join(format!("{sha}.glb"))
    }

    fn save_index(&self, records: &BTreeMap<u64, ModelRecord>) -> Result<(), ModelError> {
        let list: Vec<&ModelRecord> = records.values().collect();
        let bytes = serde_json::to_vec_pretty(&list).expect("records serialize");
        write_atomic(&self.dir.join("index.json"), &bytes)?;
        Ok(())
    }

    /// Validates and stores a blob. Nothing is written when the blob does
    /// not parse as GLB or the metadata is inconsistent.
    pub fn insert(&self, blob: &[u8], metadata: ModelMetadata) -> Result<ModelRecord, ModelError> {
        parse_glb(blob).map_err(|e| ModelError::InvalidGlb(e.to_string()))?;
        metadata.span()?;
        let sha256 = sha256_hex(blob);
        let mut records = self.records.write().expect("model lock poisoned");
        let path = self.blob_path(&sha256);
        if !path.exists() {
            write_atomic(&path, blob)?;
        }
        let model_id = records.keys().next_back().map_or(1, |k| k + 1);
        let record = ModelRecord {
            model_id,
            metadata,
            sha256,
            size: blob.len() as u64,
        };
        records.insert(model_id, record.clone());
        if let Err(e) = self.save_index(&records) {
            records.remove(&model_id);
            return Err(e);
        }
        Ok(record)
    }

    pub fn record(&self, id: u64) -> Option<ModelRecord> {
        self.records.read().expect("model lock poisoned").get(&id).cloned()
    }

    /// Record and blob; the blob is checked against its hash.
    pub fn get(&self, id: u64) -> Result<(ModelRecord, Vec<u8>), ModelError> {
        let rec = self.record(id).ok_or(ModelError::NotFound(id))?;
        let blob = std::fs::read(self.blob_path(&rec.sha256))?;
        if sha256_hex(&blob) != rec.sha256 {
            return Err(ModelError::Corrupt { id });
        }
        Ok((rec, blob))
    }

    /// All records, optionally only those tied to `feature_id`, by id.
    pub fn list(&self, feature_id: Option<u64>) -> Vec<ModelRecord> {
        self.records
            .read()
            .expect("model lock poisoned")
            .values()
            .filter(|r| feature_id.is_none() || r.metadata.feature_id == feature_id)
            .cloned()
            .collect()
    }

    pub fn set_feature(&self, id: u64, feature_id: u64) -> Result<ModelRecord, ModelError> {
        let mut records = self.records.write().expect("model lock poisoned");
        let rec = records.get_mut(&id).ok_or(ModelError::NotFound(id))?;
        let previous = rec.metadata.feature_id.replace(feature_id);
        let updated = rec.clone();
        if let Err(e) = self.save_index(&records) {
            records.get_mut(&id).expect("present").metadata.feature_id = previous;
            return Err(e);
        }
        Ok(updated)
    }

    pub fn len(&self) -> usize {
        self.records.read().expect("model lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use timeatlas_core::geo::MercatorPoint;
    use timeatlas_core::reconstruct::{export_gltf, Mesh};

    pub(crate) fn tiny_glb() -> Vec<u8> {
        let mesh = Mesh::from_part("t", None, vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]);
        let mut m = mesh;
        m.anchor = MercatorPoint::new(1.0, 2.0);
        export_gltf(&m).unwrap()
    }

    #[test]
    fn insert_get_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let glb = tiny_glb();
        let repo = ModelRepo::open(dir.path()).unwrap();
        let a = repo
            .insert(&glb, ModelMetadata { title: "a".into(), ..Default::default() })
            .unwrap();
        let b = repo.insert(&glb, ModelMetadata::default()).unwrap();
        assert_eq!((a.model_id, b.model_id), (1, 2));
        assert_eq!(a.sha256, b.sha256);
        assert_eq!(repo.get(1).unwrap().1, glb);
        repo.set_feature(2, 7).unwrap();

        let again = ModelRepo::open(dir.path()).unwrap();
        assert_eq!(again.len(), 2);
        assert_eq!(again.list(Some(7)).len(), 1);
        assert_eq!(again.record(1).unwrap().metadata.title, "a");
    }

    #[test]
    fn rejects_bad_blobs_and_detects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let repo = ModelRepo::open(dir.path()).unwrap();
        assert!(matches!(repo.insert(b"glTF nope", ModelMetadata::default()), Err(ModelError::InvalidGlb(_))));
        let bad_span = ModelMetadata {
            start_date: Some("1930".parse().unwrap()),
            end_date: Some("1920".parse().unwrap()),
            ..Default::default()
        };
        assert!(matches!(repo.insert(&tiny_glb(), bad_span), Err(ModelError::Metadata(_))));
        assert!(repo.is_empty());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

        let rec = repo.insert(&tiny_glb(), ModelMetadata::default()).unwrap();
        std::fs::write(dir.path().join(format!("{}.glb", rec.sha256)), b"tampered").unwrap();
        assert!(matches!(repo.get(rec.model_id), Err(ModelError::Corrupt { id: 1 })));
    }
}
