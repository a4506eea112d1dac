//! Feature model and GeoJSON conversion.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};

use crate::geo::{GeoBounds, GeoPoint};
use crate::geometry::Geometry;
use crate::polygon::{check_simple_ring, is_closed, Point2};
use crate::time::{Date, TimeSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Building,
    Road,
    Other,
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "building" => Ok(FeatureKind::Building),
            "road" => Ok(FeatureKind::Road),
            "other" => Ok(FeatureKind::Other),
            other => Err(format!("unknown feature kind {other:?}")),
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Building => "building",
            FeatureKind::Road => "road",
            FeatureKind::Other => "other",
        })
    }
}

/// A validated feature that has not been assigned an id yet.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDraft {
    pub kind: FeatureKind,
    /// Coordinates are `(lon, lat)` in degrees.
    pub geometry: Geometry<f64>,
    pub span: TimeSpan,
    pub properties: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub id: u64,
    pub kind: FeatureKind,
    pub geometry: Geometry<f64>,
    pub span: TimeSpan,
    pub properties: BTreeMap<String, String>,
}

impl FeatureDraft {
    pub fn with_id(self, id: u64) -> Feature {
        Feature {
            id,
            kind: self.kind,
            geometry: self.geometry,
            span: self.span,
            properties: self.properties,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        validate_geometry(&self.geometry)
    }
}

impl Feature {
    pub fn bounds(&self) -> GeoBounds<f64> {
        let pts: Vec<GeoPoint<f64>> = self.geometry.points().map(|p| GeoPoint::new(p.x, p.y)).collect();
        GeoBounds::from_points(&pts).expect("validated geometry is non-empty")
    }

    pub fn to_geojson(&self) -> Json {
        let mut props = Map::new();
        props.insert("kind".into(), json!(self.kind.to_string()));
        props.insert("start_date".into(), json!(self.span.start.to_string()));
        if let Some(end) = self.span.end {
            props.insert("end_date".into(), json!(end.to_string()));
        }
        for (k, v) in &self.properties {
            props.insert(k.clone(), json!(v));
        }
        json!({
            "type": "Feature",
            "id": self.id,
            "geometry": geometry_to_geojson(&self.geometry),
            "properties": props,
        })
    }
}

/// Reserved property names that map onto typed fields.
const RESERVED: [&str; 3] = ["kind", "start_date", "end_date"];

fn pos(v: &Json) -> Result<Point2<f64>, String> {
    let arr = v.as_array().ok_or("position is not an array")?;
    if arr.len() < 2 {
        return Err("position needs at least 2 numbers".into());
    }
    let x = arr[0].as_f64().ok_or("position coordinate is not a number")?;
    let y = arr[1].as_f64().ok_or("position coordinate is not a number")?;
    Ok(Point2::new(x, y))
}

fn positions(v: &Json) -> Result<Vec<Point2<f64>>, String> {
    v.as_array().ok_or("expected an array of positions")?.iter().map(pos).collect()
}

fn position_lists(v: &Json) -> Result<Vec<Vec<Point2<f64>>>, String> {
    v.as_array()
        .ok_or("expected an array of position arrays")?
        .iter()
        .map(positions)
        .collect()
}

pub fn geometry_from_geojson(v: &Json) -> Result<Geometry<f64>, String> {
    let ty = v.get("type").and_then(Json::as_str).ok_or("geometry has no type")?;
    let coords = v.get("coordinates").ok_or("geometry has no coordinates")?;
    match ty {
        "Point" => Ok(Geometry::Point(vec![pos(coords)?])),
        "MultiPoint" => Ok(Geometry::Point(positions(coords)?)),
        "LineString" => Ok(Geometry::LineString(vec![positions(coords)?])),
        "MultiLineString" => Ok(Geometry::LineString(position_lists(coords)?)),
        "Polygon" => Ok(Geometry::Polygon(position_lists(coords)?)),
        other => Err(format!("unsupported geometry type {other}")),
    }
}

pub fn geometry_to_geojson(g: &Geometry<f64>) -> Json {
    let p = |q: &Point2<f64>| json!([q.x, q.y]);
    let line = |l: &Vec<Point2<f64>>| Json::Array(l.iter().map(p).collect());
    match g {
        Geometry::Point(pts) if pts.len() == 1 => json!({"type": "Point", "coordinates": p(&pts[0])}),
        Geometry::Point(pts) => json!({"type": "MultiPoint", "coordinates": pts.iter().map(p).collect::<Vec<_>>()}),
        Geometry::LineString(ls) if ls.len() == 1 => json!({"type": "LineString", "coordinates": line(&ls[0])}),
        Geometry::LineString(ls) => {
            json!({"type": "MultiLineString", "coordinates": ls.iter().map(line).collect::<Vec<_>>()})
        }
        Geometry::Polygon(rings) => json!({"type": "Polygon", "coordinates": rings.iter().map(line).collect::<Vec<_>>()}),
    }
}

/// Checks coordinate ranges and shape rules for lon/lat geometry.
pub fn validate_geometry(g: &Geometry<f64>) -> Result<(), String> {
    for p in g.points() {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err("non-finite coordinate".into());
        }
        GeoPoint::new(p.x, p.y).validate().map_err(|e| e.to_string())?;
    }
    match g {
        Geometry::Point(pts) => {
            if pts.is_empty() {
                return Err("point geometry without positions".into());
            }
        }
        Geometry::LineString(lines) => {
            if lines.is_empty() {
                return Err("line geometry without lines".into());
            }
            for (i, l) in lines.iter().enumerate() {
                if l.len() < 2 || l.iter().all(|p| *p == l[0]) {
                    return Err(format!("line {i} needs at least 2 distinct positions"));
                }
            }
        }
        Geometry::Polygon(rings) => {
            if rings.is_empty() {
                return Err("polygon without rings".into());
            }
            for (i, r) in rings.iter().enumerate() {
                if !is_closed(r) || r.len() < 4 {
                    return Err(format!("ring {i} is not closed"));
                }
                check_simple_ring(r).map_err(|d| format!("ring {i}: {d}"))?;
            }
        }
    }
    Ok(())
}

/// Parses and validates one GeoJSON Feature object.
pub fn feature_from_geojson(v: &Json) -> Result<FeatureDraft, String> {
    if v.get("type").and_then(Json::as_str) != Some("Feature") {
        return Err("not a GeoJSON Feature".into());
    }
    let geometry = geometry_from_geojson(v.get("geometry").ok_or("feature has no geometry")?)?;
    let empty = Map::new();
    let props = match v.get("properties") {
        Some(Json::Object(m)) => m,
        Some(Json::Null) | None => &empty,
        Some(_) => return Err("properties is not an object".into()),
    };
    let kind = match props.get("kind") {
        Some(Json::String(s)) => s.parse()?,
        None | Some(Json::Null) => FeatureKind::Other,
        Some(_) => return Err("kind is not a string".into()),
    };
    let date = |key: &str| -> Result<Option<Date>, String> {
        match props.get(key) {
            Some(Json::String(s)) => s.parse().map(Some).map_err(|e| format!("{key}: {e}")),
            Some(Json::Number(n)) => n.to_string().parse().map(Some).map_err(|e| format!("{key}: {e}")),
            None | Some(Json::Null) => Ok(None),
            Some(_) => Err(format!("{key} is not a date string")),
        }
    };
    let start = date("start_date")?.ok_or("missing start_date")?;
    let span = TimeSpan::new(start, date("end_date")?).map_err(|e| e.to_string())?;
    let mut properties = BTreeMap::new();
    for (k, v) in props {
        if RESERVED.contains(&k.as_str()) {
            continue;
        }
        let s = match v {
            Json::String(s) => s.clone(),
            Json::Number(n) => n.to_string(),
            Json::Bool(b) => b.to_string(),
            Json::Null => continue,
            _ => return Err(format!("property {k:?} must be a scalar")),
        };
        properties.insert(k.clone(), s);
    }
    let draft = FeatureDraft {
        kind,
        geometry,
        span,
        properties,
    };
    draft.validate()?;
    Ok(draft)
}

/// Document-level validation failure within a batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DocumentError {
    pub index: usize,
    pub message: String,
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "document {}: {}", self.index, self.message)
    }
}

/// Accepts a Feature, a FeatureCollection or a JSON array of Features.
/// All documents are checked; any failure rejects the whole batch.
pub fn parse_documents(v: &Json) -> Result<Vec<FeatureDraft>, Vec<DocumentError>> {
    let docs: Vec<&Json> = match v {
        Json::Array(a) => a.iter().collect(),
        Json::Object(_) if v.get("type").and_then(Json::as_str) == Some("FeatureCollection") => {
            match v.get("features").and_then(Json::as_array) {
                Some(a) => a.iter().collect(),
                None => {
                    return Err(vec![DocumentError {
                        index: 0,
                        message: "FeatureCollection without features array".into(),
                    }])
                }
            }
        }
        _ => vec![v],
    };
    let mut out = Vec::with_capacity(docs.len());
    let mut errors = Vec::new();
    for (index, d) in docs.into_iter().enumerate() {
        match feature_from_geojson(d) {
            Ok(f) => out.push(f),
            Err(message) => errors.push(DocumentError { index, message }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}
