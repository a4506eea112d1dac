//! Append-only newline-delimited JSON log.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::StoreError;

/// One committed change. Ingest records carry the GeoJSON form of every
/// feature in the batch, ids included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LogRecord {
    Ingest { features: Vec<Json> },
    Link { feature_id: u64, model_id: u64 },
}

#[derive(Debug)]
pub struct LogWriter {
    file: File,
}

impl LogWriter {
    /// Opens for appending, first cutting the file back to `valid_len`
    /// bytes so a torn tail is not glued to the next record.
    pub fn open(path: &Path, valid_len: u64) -> Result<Self, StoreError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        if file.metadata()?.len() > valid_len {
            file.set_len(valid_len)?;
        }
        Ok(Self { file })
    }

    /// Writes one record and syncs it to disk before returning.
    pub fn append(&mut self, rec: &LogRecord) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(rec)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        Ok(())
    }
}

/// Reads every record, returning them with the byte length of the valid
/// prefix. A final line without its newline is treated
/// as an interrupted write and skipped.
pub fn read_log(path: &Path) -> Result<(Vec<LogRecord>, u64), StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(e) => return Err(e.into()),
    };
    let mut reader = BufReader::new(file);
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut line_no = 0;
    let mut valid_len = 0u64;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let complete = buf.ends_with('\n');
        let text = buf.trim_end();
        if text.is_empty() {
            valid_len += n as u64;
            continue;
        }
        if !complete {
            // the writer emits record and newline together; no newline means
            // the append never finished and was never acknowledged
            warn!("{}: ignoring torn record at line {line_no}", path.display());
            break;
        }
        match serde_json::from_str(text) {
            Ok(rec) => {
                out.push(rec);
                valid_len += n as u64;
            }
            Err(e) => {
                return Err(StoreError::Log {
                    line: line_no,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok((out, valid_len))
}
