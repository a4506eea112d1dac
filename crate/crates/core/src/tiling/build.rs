//! Store features to MVT bytes.

use log::debug;

use super::clip::{clip_geometry, quantize_geometry, ClipWindow};
use super::mvt::{encode_tile, TileFeature, TileLayer, Value};
use super::TilingError;
use crate::geo::{lonlat_to_mercator, GeoPoint, TileAddress};
use crate::polygon::Point2;
use crate::store::{Feature, FeatureKind, StoreSnapshot};
use crate::time::Date;

/// Per-tile build options. With `at` set, only features alive at that date
/// are included (per-epoch tiles); by default every feature is carried with
/// its date attributes.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TileConfig {
    pub window: ClipWindow,
    pub at: Option<Date>,
}

pub const START_DATE_TAG: &str = "start_date";
pub const END_DATE_TAG: &str = "end_date";

pub fn layer_name(kind: FeatureKind) -> &'static str {
    match kind {
        FeatureKind::Building => "buildings",
        FeatureKind::Road => "roads",
        FeatureKind::Other => "other",
    }
}

/// Projects, clips and quantizes features into per-kind layers. Layers
/// appear in the order buildings, roads, other; empty layers are omitted.
pub fn build_layers<'a>(
    features: impl IntoIterator<Item = &'a Feature>,
    t: TileAddress,
    config: &TileConfig,
) -> Result<Vec<TileLayer>, TilingError> {
    let kinds = [FeatureKind::Building, FeatureKind::Road, FeatureKind::Other];
    let mut layers: Vec<TileLayer> = kinds
        .iter()
        .map(|k| {
            let mut l = TileLayer::new(layer_name(*k));
            l.extent = config.window.extent;
            l
        })
        .collect();
    let window = config.window.to_mercator::<f64>(t);
    for f in features {
        if config.at.is_some_and(|d| !f.span.contains(d)) {
            continue;
        }
        let with_id = |e: TilingError| TilingError::Feature {
            id: f.id,
            source: Box::new(e),
        };
        let merc = f
            .geometry
            .try_map(|p| lonlat_to_mercator(GeoPoint::new(p.x, p.y)).map(|m| Point2::new(m.x, m.y)))
            .map_err(|e| with_id(e.into()))?;
        let clipped = clip_geometry(&merc, &window).map_err(with_id)?;
        if clipped.is_empty() {
            continue;
        }
        let Some(q) = quantize_geometry(&clipped, t, config.window.extent) else {
            debug!("feature {} degenerate in tile {t}, omitted", f.id);
            continue;
        };
        let layer_idx = kinds.iter().position(|k| *k == f.kind).expect("all kinds listed");
        layers[layer_idx].features.push(TileFeature {
            id: Some(f.id),
            geom_type: q.geom_type,
            paths: q.paths,
            tags: feature_tags(f),
        });
    }
    layers.retain(|l| !l.features.is_empty());
    Ok(layers)
}

pub fn build_tile<'a>(
    features: impl IntoIterator<Item = &'a Feature>,
    t: TileAddress,
    config: &TileConfig,
) -> Result<Vec<u8>, TilingError> {
    encode_tile(&build_layers(features, t, config)?)
}

/// Encodes tile `t` from every snapshot feature whose bounds meet the
/// buffered tile window.
pub fn render_tile(snap: &StoreSnapshot, t: TileAddress, config: &TileConfig) -> Result<Vec<u8>, TilingError> {
    let candidates = snap.query(&config.window.to_geo(t), config.at);
    build_tile(candidates.iter().map(|f| f.as_ref()), t, config)
}

fn feature_tags(f: &Feature) -> Vec<(String, Value)> {
    let mut tags = vec![(START_DATE_TAG.to_string(), Value::String(f.span.start.to_string()))];
    if let Some(end) = f.span.end {
        tags.push((END_DATE_TAG.to_string(), Value::String(end.to_string())));
    }
    for (k, v) in &f.properties {
        let value = match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Value::Double(x),
            _ => Value::String(v.clone()),
        };
        tags.push((k.clone(), value));
    }
    tags
}

/// Reads a feature's `[start, end)` span back from its date tags.
pub fn feature_span(f: &TileFeature) -> Option<crate::time::TimeSpan> {
    let start: Date = f.tag(START_DATE_TAG)?.as_str()?.parse().ok()?;
    let end = match f.tag(END_DATE_TAG) {
        Some(v) => Some(v.as_str()?.parse().ok()?),
        None => None,
    };
    crate::time::TimeSpan::new(start, end).ok()
}
