//! Third-party decoders used as independent checkers.

use std::collections::BTreeMap;

use geo_types::{Geometry, LineString};

/// A decoded feature in a canonical, comparable form: geometry type, open
/// integer paths and stringified tags.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RefFeature {
    pub id: Option<u64>,
    pub geom_type: u8,
    pub paths: Vec<Vec<[i64; 2]>>,
    pub tags: BTreeMap<String, String>,
}

fn open_path(ls: &LineString<f32>, closed: bool) -> Vec<[i64; 2]> {
    let mut pts: Vec<[i64; 2]> = ls.0.iter().map(|c| [c.x as i64, c.y as i64]).collect();
    if closed && pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    pts
}

fn flatten(g: &Geometry<f32>) -> Result<(u8, Vec<Vec<[i64; 2]>>), String> {
    Ok(match g {
        Geometry::Point(p) => (1, vec![vec![[p.x() as i64, p.y() as i64]]]),
        Geometry::MultiPoint(mp) => (1, mp.0.iter().map(|p| vec![[p.x() as i64, p.y() as i64]]).collect()),
        Geometry::LineString(l) => (2, vec![open_path(l, false)]),
        Geometry::MultiLineString(ml) => (2, ml.0.iter().map(|l| open_path(l, false)).collect()),
        Geometry::Polygon(p) => {
            let mut v = vec![open_path(p.exterior(), true)];
            v.extend(p.interiors().iter().map(|r| open_path(r, true)));
            (3, v)
        }
        Geometry::MultiPolygon(mp) => {
            let mut v = Vec::new();
            for p in &mp.0 {
                v.push(open_path(p.exterior(), true));
                v.extend(p.interiors().iter().map(|r| open_path(r, true)));
            }
            (3, v)
        }
        other => return Err(format!("unexpected geometry {other:?}")),
    })
}

fn value_string(v: &mvt_reader::feature::Value) -> String {
    use mvt_reader::feature::Value as V;
    match v {
        V::String(s) => s.clone(),
        V::Float(f) => f.to_string(),
        V::Double(d) => d.to_string(),
        V::Int(i) | V::SInt(i) => i.to_string(),
        V::UInt(u) => u.to_string(),
        V::Bool(b) => b.to_string(),
        V::Null => "null".into(),
    }
}

/// Decodes a tile with the `mvt-reader` crate: `(layer name, extent,
/// features)` per layer.
pub fn decode_mvt(bytes: &[u8]) -> Result<Vec<(String, u32, Vec<RefFeature>)>, String> {
    let reader = mvt_reader::Reader::new(bytes.to_vec()).map_err(|e| e.to_string())?;
    let meta = reader.get_layer_metadata().map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for layer in meta {
        let feats = reader.get_features(layer.layer_index).map_err(|e| e.to_string())?;
        let mut list = Vec::new();
        for f in feats {
            let (geom_type, paths) = flatten(&f.geometry)?;
            let tags = f
                .properties
                .unwrap_or_default()
                .iter()
                .map(|(k, v)| (k.clone(), value_string(v)))
                .collect();
            list.push(RefFeature { id: f.id, geom_type, paths, tags });
        }
        out.push((layer.name, layer.extent, list));
    }
    Ok(out)
}

/// Summary of a GLB after loading it with the `gltf` crate.
#[derive(Debug, Clone)]
pub struct GltfSummary {
    pub primitives: usize,
    pub vertices: usize,
    pub triangles: usize,
    /// Signed volume recomputed from the float32 data, converted back to
    /// the z-up frame.
    pub volume: f64,
    pub anchor: Option<(f64, f64)>,
}

/// Loads and validates a GLB with the `gltf` crate, then re-reads all
/// triangle primitives.
pub fn validate_glb(bytes: &[u8]) -> Result<GltfSummary, String> {
    let (doc, buffers, _) = gltf::import_slice(bytes).map_err(|e| e.to_string())?;
    let mut s = GltfSummary { primitives: 0, vertices: 0, triangles: 0, volume: 0.0, anchor: None };
    if let Some(extras) = doc.as_json().asset.extras.as_ref() {
        let v: serde_json::Value = serde_json::from_str(extras.get()).map_err(|e| e.to_string())?;
        s.anchor = Some((v["merc_x"].as_f64().unwrap_or(f64::NAN), v["merc_y"].as_f64().unwrap_or(f64::NAN)));
    }
    for mesh in doc.meshes() {
        for prim in mesh.primitives() {
            if prim.mode() != gltf::mesh::Mode::Triangles {
                return Err("non-triangle primitive".into());
            }
            let r = prim.reader(|b| buffers.get(b.index()).map(|d| &d.0[..]));
            let pos: Vec<[f32; 3]> = r.read_positions().ok_or("primitive without positions")?.collect();
            let idx: Vec<u32> = r.read_indices().ok_or("primitive without indices")?.into_u32().collect();
            if idx.len() % 3 != 0 || idx.iter().any(|&i| i as usize >= pos.len()) {
                return Err("bad index buffer".into());
            }
            s.primitives += 1;
            s.vertices += pos.len();
            s.triangles += idx.len() / 3;
            for t in idx.chunks(3) {
                // undo the y-up conversion: (x, y, z) = (X, -Z, Y)
                let p = |i: u32| {
                    let v = pos[i as usize];
                    [v[0] as f64, -(v[2] as f64), v[1] as f64]
                };
                let (a, b, c) = (p(t[0]), p(t[1]), p(t[2]));
                s.volume += (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]))
                    / 6.0;
            }
        }
    }
    Ok(s)
}
