use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Map, Value as Json};
use timeatlas_core::geo::{tiles_covering, TileAddress, MAX_ZOOM};
use timeatlas_core::store::Store;
use timeatlas_core::tiling::{decode_tile, render_tile, TileConfig, Value};

use crate::error::{read_file, read_json, write_file, CliError, CliResult};
use crate::{parse_date, TileCommand};

pub fn run(cmd: TileCommand, out: &mut dyn Write) -> CliResult {
    match cmd {
        TileCommand::Build {
            features,
            zoom,
            out: dir,
            time,
        } => {
            let zooms = parse_zoom_range(&zoom)?;
            let at = time.as_deref().map(parse_date).transpose()?;
            let n = build(&features, zooms, at, &dir)?;
            writeln!(out, "wrote {n} tiles to {}", dir.display())?;
            Ok(())
        }
        TileCommand::Inspect { tile } => {
            let bytes = read_file(&tile)?;
            let layers = decode_tile(&bytes).map_err(|e| CliError::file(&tile, e))?;
            let doc: Vec<Json> = layers
                .iter()
                .map(|l| {
                    let features: Vec<Json> = l
                        .features
                        .iter()
                        .map(|f| {
                            let tags: Map<String, Json> = f.tags.iter().map(|(k, v)| (k.clone(), tag_json(v))).collect();
                            json!({
                                "id": f.id,
                                "type": format!("{:?}", f.geom_type),
                                "tags": tags,
                                "paths": f.paths,
                            })
                        })
                        .collect();
                    json!({"name": l.name, "extent": l.extent, "features": features})
                })
                .collect();
            serde_json::to_writer_pretty(&mut *out, &json!({ "layers": doc })).map_err(CliError::invalid)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn tag_json(v: &Value) -> Json {
    match v {
        Value::String(s) => json!(s),
        Value::Bool(b) => json!(b),
        Value::Int(i) | Value::SInt(i) => json!(i),
        Value::UInt(u) => json!(u),
        other => json!(other.as_f64()),
    }
}

/// `z` or `a..b` (inclusive).
pub fn parse_zoom_range(raw: &str) -> CliResult<std::ops::RangeInclusive<u8>> {
    let bad = || CliError::Usage(format!("zoom {raw:?} must be `z` or `a..b` with 0 <= a <= b <= {MAX_ZOOM}"));
    let (a, b) = match raw.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (raw, raw),
    };
    let a: u8 = a.trim().parse().map_err(|_| bad())?;
    let b: u8 = b.trim().parse().map_err(|_| bad())?;
    if a > b || b > MAX_ZOOM {
        return Err(bad());
    }
    Ok(a..=b)
}

/// Renders every tile meeting a feature's bounds at each zoom. Tiles are
/// rendered in parallel and written in address order.
fn build(
    features: &Path,
    zooms: std::ops::RangeInclusive<u8>,
    at: Option<timeatlas_core::Date>,
    dir: &Path,
) -> CliResult<usize> {
    let doc = read_json(features)?;
    let store = Store::in_memory();
    store.ingest_json(&doc).map_err(|e| CliError::file(features, e))?;
    let snap = store.snapshot();

    let mut addresses = BTreeSet::new();
    for f in snap.features() {
        if at.is_some_and(|d| !f.span.contains(d)) {
            continue;
        }
        for z in zooms.clone() {
            addresses.extend(tiles_covering(&f.bounds(), z).map_err(CliError::invalid)?);
        }
    }
    let config = TileConfig {
        at,
        ..TileConfig::default()
    };
    let addresses: Vec<TileAddress> = addresses.into_iter().collect();
    let rendered: Vec<(TileAddress, Vec<u8>)> = addresses
        .par_iter()
        .map(|&t| render_tile(&snap, t, &config).map(|b| (t, b)))
        .collect::<Result<_, _>>()
        .map_err(CliError::invalid)?;
    for (t, bytes) in &rendered {
        let path = dir.join(t.z.to_string()).join(t.x.to_string()).join(format!("{}.mvt", t.y));
        write_file(&path, bytes)?;
    }
    log::info!("rendered {} tiles from {} features", rendered.len(), snap.len());
    Ok(rendered.len())
}
