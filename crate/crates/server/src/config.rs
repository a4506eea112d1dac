//! Service configuration: file, then environment, then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use timeatlas_core::georectify::{parse_transform_kind, TransformKind};
use timeatlas_core::tiling::ClipWindow;

pub const DEFAULT_MAX_MODEL_BYTES: usize = 32 * 1024 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("environment variable {name}={value:?}: {message}")]
    Env { name: &'static str, value: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    pub data_dir: PathBuf,
    pub tile_extent: u32,
    pub tile_buffer: u32,
    /// Transform used by the warp endpoint when a request names none.
    pub default_transform: String,
    /// Allowed CORS origins; empty disables CORS headers.
    pub cors_origins: Vec<String>,
    pub max_model_bytes: usize,
    /// Rendered tiles kept in memory for the current snapshot.
    pub tile_cache_entries: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("data"),
            tile_extent: 4096,
            tile_buffer: 64,
            default_transform: "affine".into(),
            cors_origins: Vec::new(),
            max_model_bytes: DEFAULT_MAX_MODEL_BYTES,
            tile_cache_entries: 1024,
        }
    }
}

/// Values given on the command line; they win over file and environment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub host: Option<String>,
    pub port: Option<u16>,
    pub data_dir: Option<PathBuf>,
}

impl ServiceConfig {
    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |message: String| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        };
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| parse_err(e.to_string()))
        }
    }

    /// Applies `TA_PORT` and `TA_DATA_DIR` as returned by `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = lookup("TA_PORT") {
            self.port = v.trim().parse().map_err(|e: std::num::ParseIntError| ConfigError::Env {
                name: "TA_PORT",
                value: v.clone(),
                message: e.to_string(),
            })?;
        }
        if let Some(v) = lookup("TA_DATA_DIR") {
            if v.is_empty() {
                return Err(ConfigError::Env {
                    name: "TA_DATA_DIR",
                    value: v,
                    message: "must not be empty".into(),
                });
            }
            self.data_dir = PathBuf::from(v);
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &ConfigOverrides) {
        if let Some(h) = &o.host {
            self.host = h.clone();
        }
        if let Some(p) = o.port {
            self.port = p;
        }
        if let Some(d) = &o.data_dir {
            self.data_dir = d.clone();
        }
    }

    /// File (or defaults), then environment, then flags; validated.
    pub fn load(
        file: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
        overrides: &ConfigOverrides,
    ) -> Result<Self, ConfigError> {
        let mut c = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        c.apply_env(env)?;
        c.apply_overrides(overrides);
        c.validate()?;
        Ok(c)
    }

    /// Checks ranges and that the data directory exists (creating it if
    /// needed) and is writable.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.port == 0 {
            return Err(ConfigError::Invalid("port must be in 1..=65535".into()));
        }
        if self.tile_extent == 0 {
            return Err(ConfigError::Invalid("tile_extent must be positive".into()));
        }
        if self.max_model_bytes == 0 {
            return Err(ConfigError::Invalid("max_model_bytes must be positive".into()));
        }
        self.transform_kind()?;
        self.ensure_data_dir()
    }

    pub fn ensure_data_dir(&self) -> Result<(), ConfigError> {
        let bad = |e: std::io::Error| {
            ConfigError::Invalid(format!("data directory {} is not writable: {e}", self.data_dir.display()))
        };
        std::fs::create_dir_all(&self.data_dir).map_err(bad)?;
        let probe = self.data_dir.join(".write-probe");
        std::fs::write(&probe, b"").map_err(bad)?;
        std::fs::remove_file(&probe).map_err(bad)
    }

    pub fn transform_kind(&self) -> Result<(TransformKind, u8), ConfigError> {
        parse_transform_kind(&self.default_transform).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn clip_window(&self) -> ClipWindow {
        ClipWindow {
            extent: self.tile_extent,
            buffer: self.tile_buffer,
        }
    }

    pub fn bind_address(&self) -> String {
        format!("{}:{}", self.host, self.port)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_flags_env_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("cfg.toml");
        let data = dir.path().join("from-file");
        std::fs::write(
            &file,
            format!("port = 9000\ndata_dir = {:?}\ncors_origins = [\"http://localhost:5173\"]\n", data),
        )
        .unwrap();

        let none = |_: &str| None;
        let c = ServiceConfig::load(Some(&file), none, &ConfigOverrides::default()).unwrap();
        assert_eq!((c.port, c.data_dir.clone()), (9000, data.clone()));
        assert_eq!(c.cors_origins, vec!["http://localhost:5173".to_string()]);

        let env = |k: &str| (k == "TA_PORT").then(|| "9100".to_string());
        let c = ServiceConfig::load(Some(&file), env, &ConfigOverrides::default()).unwrap();
        assert_eq!(c.port, 9100);

        let flags = ConfigOverrides {
            port: Some(9200),
            ..Default::default()
        };
        let c = ServiceConfig::load(Some(&file), env, &flags).unwrap();
        assert_eq!(c.port, 9200);
    }

    #[test]
    fn json_files_and_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("cfg.json");
        let data = dir.path().join("d");
        std::fs::write(&file, serde_json::json!({"port": 7000, "data_dir": data}).to_string()).unwrap();
        let none = |_: &str| None;
        assert_eq!(ServiceConfig::load(Some(&file), none, &ConfigOverrides::default()).unwrap().port, 7000);

        let env = |k: &str| (k == "TA_PORT").then(|| "http".to_string());
        assert!(matches!(
            ServiceConfig::load(Some(&file), env, &ConfigOverrides::default()),
            Err(ConfigError::Env { name: "TA_PORT", .. })
        ));
        let zero = ConfigOverrides {
            port: Some(0),
            ..Default::default()
        };
        assert!(ServiceConfig::load(Some(&file), none, &zero).is_err());

        std::fs::write(&file, r#"{"port": 7000, "colour": "red"}"#).unwrap();
        assert!(matches!(
            ServiceConfig::load(Some(&file), none, &ConfigOverrides::default()),
            Err(ConfigError::Parse { .. })
        ));
    }
}
