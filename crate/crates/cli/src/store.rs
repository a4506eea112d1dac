use std::io::Write;
use std::path::Path;

use serde_json::json;
use timeatlas_core::store::{check_overlaps, Store};
use timeatlas_core::GeoBounds;

use crate::error::{read_json, CliError, CliResult};
use crate::{parse_bbox, parse_date, StoreCommand};

/// Log file inside a data directory; shared with the server.
pub const LOG_FILE: &str = "features.ndjson";

fn open(data_dir: &Path) -> CliResult<Store> {
    std::fs::create_dir_all(data_dir).map_err(|e| CliError::file(data_dir, e))?;
    let log = data_dir.join(LOG_FILE);
    Store::open(&log).map_err(|e| CliError::file(&log, e))
}

pub fn run(cmd: StoreCommand, out: &mut dyn Write) -> CliResult {
    match cmd {
        StoreCommand::Ingest { data_dir, files } => {
            // parse everything first so a bad file leaves the log untouched
            let docs = files
                .iter()
                .map(|f| read_json(f).map(|d| (f, d)))
                .collect::<CliResult<Vec<_>>>()?;
            let store = open(&data_dir)?;
            for (path, doc) in docs {
                let ids = store.ingest_json(&doc).map_err(|e| CliError::file(path, e))?;
                writeln!(out, "{}: {}", path.display(), json!(ids))?;
            }
            Ok(())
        }
        StoreCommand::Query { data_dir, bbox, time } => {
            let bbox = match bbox {
                Some(b) => parse_bbox(&b)?,
                None => GeoBounds::new(-180.0, -90.0, 180.0, 90.0),
            };
            let at = time.as_deref().map(parse_date).transpose()?;
            let store = open(&data_dir)?;
            let hits = store.snapshot().query(&bbox, at);
            let doc = json!({
                "type": "FeatureCollection",
                "features": hits.iter().map(|f| f.to_geojson()).collect::<Vec<_>>(),
            });
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(CliError::invalid)?;
            writeln!(out)?;
            Ok(())
        }
        StoreCommand::Overlaps { data_dir } => {
            let store = open(&data_dir)?;
            let conflicts = check_overlaps(&store.snapshot());
            serde_json::to_writer_pretty(&mut *out, &conflicts).map_err(CliError::invalid)?;
            writeln!(out)?;
            Ok(())
        }
    }
}
