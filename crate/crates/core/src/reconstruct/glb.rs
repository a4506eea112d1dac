//! Binary glTF 2.0 export and a structural reader used to validate uploads.

use serde_json::{json, Value};

use super::components::ComponentKind;
use super::mesh::Mesh;
use super::ReconstructError;

const GLB_MAGIC: u32 = 0x4654_6C67;
const CHUNK_JSON: u32 = 0x4E4F_534A;
const CHUNK_BIN: u32 = 0x004E_4942;
const FLOAT: u32 = 5126;
const UNSIGNED_INT: u32 = 5125;
const UNSIGNED_SHORT: u32 = 5123;
const UNSIGNED_BYTE: u32 = 5121;

fn pad4(buf: &mut Vec<u8>, fill: u8) {
    while !buf.len().is_multiple_of(4) {
        buf.push(fill);
    }
}

/// Encodes the mesh as a single-buffer GLB, one primitive per group.
/// Coordinates are converted to glTF's y-up convention, `(x, y, z)` to
/// `(x, z, -y)`; the Mercator anchor goes in `asset.extras`.
pub fn export_gltf(mesh: &Mesh) -> Result<Vec<u8>, ReconstructError> {
    if mesh.is_empty() {
        return Err(ReconstructError::Domain("cannot export an empty mesh".into()));
    }
    mesh.validate().map_err(ReconstructError::Domain)?;

    let mut bin: Vec<u8> = Vec::new();
    let mut views = Vec::new();
    let mut accessors = Vec::new();
    let mut primitives = Vec::new();
    let mut kinds: Vec<Option<ComponentKind>> = Vec::new();

    for g in &mesh.groups {
        if g.triangles.is_empty() {
            continue;
        }
        let verts = &mesh.vertices[g.vertices.clone()];
        let mut lo = [f32::INFINITY; 3];
        let mut hi = [f32::NEG_INFINITY; 3];
        let offset = bin.len();
        for v in verts {
            let p = [v[0] as f32, v[2] as f32, -v[1] as f32];
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
                bin.extend_from_slice(&p[k].to_le_bytes());
            }
        }
        views.push(json!({"buffer": 0, "byteOffset": offset, "byteLength": bin.len() - offset, "target": 34962}));
        accessors.push(json!({
            "bufferView": views.len() - 1,
            "componentType": FLOAT,
            "count": verts.len(),
            "type": "VEC3",
            "min": lo,
            "max": hi,
        }));
        let pos = accessors.len() - 1;

        let base = g.vertices.start as u32;
        let offset = bin.len();
        let tris = &mesh.triangles[g.triangles.clone()];
        for t in tris {
            for &i in t {
                bin.extend_from_slice(&(i - base).to_le_bytes());
            }
        }
        views.push(json!({"buffer": 0, "byteOffset": offset, "byteLength": bin.len() - offset, "target": 34963}));
        accessors.push(json!({
            "bufferView": views.len() - 1,
            "componentType": UNSIGNED_INT,
            "count": tris.len() * 3,
            "type": "SCALAR",
        }));

        let material = match kinds.iter().position(|k| *k == g.kind) {
            Some(i) => i,
            None => {
                kinds.push(g.kind);
                kinds.len() - 1
            }
        };
        primitives.push(json!({
            "attributes": {"POSITION": pos},
            "indices": accessors.len() - 1,
            "material": material,
            "mode": 4,
            "extras": {"tag": g.tag},
        }));
    }

    let materials: Vec<Value> = kinds
        .iter()
        .map(|k| {
            json!({
                "name": k.map_or("wall", |k| k.as_str()),
                "pbrMetallicRoughness": {
                    "baseColorFactor": ComponentKind::color(*k),
                    "metallicFactor": 0.0,
                    "roughnessFactor": 0.9,
                },
                "doubleSided": true,
            })
        })
        .collect();

    let doc = json!({
        "asset": {
            "version": "2.0",
            "generator": "timeatlas",
            "extras": {"merc_x": mesh.anchor.x, "merc_y": mesh.anchor.y},
        },
        "scene": 0,
        "scenes": [{"nodes": [0]}],
        "nodes": [{"mesh": 0, "name": "building"}],
        "meshes": [{"primitives": primitives}],
        "materials": materials,
        "accessors": accessors,
        "bufferViews": views,
        "buffers": [{"byteLength": bin.len()}],
    });

    let mut json_bytes = serde_json::to_vec(&doc).map_err(|e| ReconstructError::Glb(e.to_string()))?;
    pad4(&mut json_bytes, b' ');
    pad4(&mut bin, 0);
    let total = 12 + 8 + json_bytes.len() + 8 + bin.len();
    let total = u32::try_from(total).map_err(|_| ReconstructError::Glb("mesh exceeds 4 GiB".into()))?;

    let mut out = Vec::with_capacity(total as usize);
    out.extend_from_slice(&GLB_MAGIC.to_le_bytes());
    out.extend_from_slice(&2u32.to_le_bytes());
    out.extend_from_slice(&total.to_le_bytes());
    out.extend_from_slice(&(json_bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&CHUNK_JSON.to_le_bytes());
    out.extend_from_slice(&json_bytes);
    out.extend_from_slice(&(bin.len() as u32).to_le_bytes());
    out.extend_from_slice(&CHUNK_BIN.to_le_bytes());
    out.extend_from_slice(&bin);
    Ok(out)
}

/// Parsed GLB container with its JSON document and binary chunk.
#[derive(Debug, Clone)]
pub struct GlbDocument {
    pub json: Value,
    pub bin: Vec<u8>,
}

impl GlbDocument {
    /// Mercator anchor written by [`export_gltf`], if present.
    pub fn anchor(&self) -> Option<(f64, f64)> {
        let e = self.json.get("asset")?.get("extras")?;
        Some((e.get("merc_x")?.as_f64()?, e.get("merc_y")?.as_f64()?))
    }

    /// Total triangle count over all indexed triangle primitives.
    pub fn triangle_count(&self) -> usize {
        let acc = self.json["accessors"].as_array();
        let mut n = 0;
        for m in self.json["meshes"].as_array().into_iter().flatten() {
            for p in m["primitives"].as_array().into_iter().flatten() {
                if let Some(i) = p["indices"].as_u64() {
                    let count = acc.and_then(|a| a.get(i as usize)).and_then(|a| a["count"].as_u64());
                    n += count.unwrap_or(0) as usize / 3;
                }
            }
        }
        n
    }
}

fn u32_at(b: &[u8], off: usize) -> Option<u32> {
    b.get(off..off + 4).map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
}

fn err<T>(msg: impl Into<String>) -> Result<T, ReconstructError> {
    Err(ReconstructError::Glb(msg.into()))
}

fn component_size(ct: u64) -> Option<usize> {
    match ct as u32 {
        5120 | UNSIGNED_BYTE => Some(1),
        5122 | UNSIGNED_SHORT => Some(2),
        UNSIGNED_INT | FLOAT => Some(4),
        _ => None,
    }
}

fn type_arity(t: &str) -> Option<usize> {
    Some(match t {
        "SCALAR" => 1,
        "VEC2" => 2,
        "VEC3" => 3,
        "VEC4" => 4,
        "MAT2" => 4,
        "MAT3" => 9,
        "MAT4" => 16,
        _ => return None,
    })
}

/// Reads and structurally validates a GLB: header, chunk layout, glTF
/// version, and that every accessor of the embedded buffer stays in bounds.
/// Index accessors are checked against their primitive's vertex count.
pub fn parse_glb(bytes: &[u8]) -> Result<GlbDocument, ReconstructError> {
    if u32_at(bytes, 0) != Some(GLB_MAGIC) {
        return err("missing glTF magic");
    }
    if u32_at(bytes, 4) != Some(2) {
        return err("unsupported container version");
    }
    if u32_at(bytes, 8).map(|l| l as usize) != Some(bytes.len()) {
        return err("declared length does not match the data");
    }
    let json_len = u32_at(bytes, 12).ok_or_else(|| ReconstructError::Glb("truncated header".into()))? as usize;
    if u32_at(bytes, 16) != Some(CHUNK_JSON) {
        return err("first chunk is not JSON");
    }
    let json_end = 20usize
        .checked_add(json_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| ReconstructError::Glb("JSON chunk overruns the file".into()))?;
    let json: Value =
        serde_json::from_slice(&bytes[20..json_end]).map_err(|e| ReconstructError::Glb(format!("JSON chunk: {e}")))?;

    let mut bin = Vec::new();
    if json_end < bytes.len() {
        let len = u32_at(bytes, json_end).ok_or_else(|| ReconstructError::Glb("truncated chunk header".into()))?;
        if u32_at(bytes, json_end + 4) != Some(CHUNK_BIN) {
            return err("second chunk is not BIN");
        }
        let start = json_end + 8;
        let end = start
            .checked_add(len as usize)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| ReconstructError::Glb("BIN chunk overruns the file".into()))?;
        bin = bytes[start..end].to_vec();
    }

    let version = json["asset"]["version"].as_str().unwrap_or_default();
    if !version.starts_with("2.") {
        return err(format!("asset.version {version:?} is not 2.x"));
    }
    let doc = GlbDocument { json, bin };
    check_accessors(&doc)?;
    Ok(doc)
}

fn check_accessors(doc: &GlbDocument) -> Result<(), ReconstructError> {
    let j = &doc.json;
    let empty = Vec::new();
    let views = j["bufferViews"].as_array().unwrap_or(&empty);
    let accessors = j["accessors"].as_array().unwrap_or(&empty);
    for (i, b) in j["buffers"].as_array().unwrap_or(&empty).iter().enumerate() {
        if b.get("uri").is_none() && b["byteLength"].as_u64().unwrap_or(u64::MAX) > doc.bin.len() as u64 {
            return err(format!("buffer {i} is longer than the BIN chunk"));
        }
    }
    for (i, v) in views.iter().enumerate() {
        let off = v["byteOffset"].as_u64().unwrap_or(0);
        let len = v["byteLength"].as_u64().ok_or_else(|| ReconstructError::Glb(format!("bufferView {i} has no byteLength")))?;
        if v["buffer"].as_u64() == Some(0) && off + len > doc.bin.len() as u64 {
            return err(format!("bufferView {i} overruns the BIN chunk"));
        }
    }
    for (i, a) in accessors.iter().enumerate() {
        let count = a["count"].as_u64().ok_or_else(|| ReconstructError::Glb(format!("accessor {i} has no count")))?;
        let size = component_size(a["componentType"].as_u64().unwrap_or(0))
            .ok_or_else(|| ReconstructError::Glb(format!("accessor {i} has a bad componentType")))?;
        let arity = type_arity(a["type"].as_str().unwrap_or(""))
            .ok_or_else(|| ReconstructError::Glb(format!("accessor {i} has a bad type")))?;
        let Some(vi) = a["bufferView"].as_u64() else { continue };
        let v = views
            .get(vi as usize)
            .ok_or_else(|| ReconstructError::Glb(format!("accessor {i} references missing bufferView {vi}")))?;
        let elem = (size * arity) as u64;
        let stride = v["byteStride"].as_u64().unwrap_or(elem);
        let need = a["byteOffset"].as_u64().unwrap_or(0) + if count == 0 { 0 } else { (count - 1) * stride + elem };
        if need > v["byteLength"].as_u64().unwrap_or(0) {
            return err(format!("accessor {i} overruns its bufferView"));
        }
    }
    for m in j["meshes"].as_array().unwrap_or(&empty) {
        for p in m["primitives"].as_array().unwrap_or(&empty) {
            let Some(pos) = p["attributes"]["POSITION"].as_u64() else {
                return err("primitive without POSITION");
            };
            let n_verts = accessors
                .get(pos as usize)
                .and_then(|a| a["count"].as_u64())
                .ok_or_else(|| ReconstructError::Glb(format!("POSITION accessor {pos} missing")))?;
            if let Some(ix) = p["indices"].as_u64() {
                let max = max_index(doc, views, accessors, ix as usize)?;
                if max.is_some_and(|m| m >= n_verts) {
                    return err(format!("index accessor {ix} references vertex past {n_verts}"));
                }
            }
        }
    }
    Ok(())
}

fn max_index(doc: &GlbDocument, views: &[Value], accessors: &[Value], ix: usize) -> Result<Option<u64>, ReconstructError> {
    let a = accessors
        .get(ix)
        .ok_or_else(|| ReconstructError::Glb(format!("index accessor {ix} missing")))?;
    let Some(v) = a["bufferView"].as_u64().and_then(|v| views.get(v as usize)) else {
        return Ok(None);
    };
    if v["buffer"].as_u64() != Some(0) {
        return Ok(None);
    }
    let ct = a["componentType"].as_u64().unwrap_or(0) as u32;
    let size = match ct {
        UNSIGNED_BYTE => 1,
        UNSIGNED_SHORT => 2,
        UNSIGNED_INT => 4,
        _ => return err(format!("index accessor {ix} must be unsigned")),
    };
    let start = (v["byteOffset"].as_u64().unwrap_or(0) + a["byteOffset"].as_u64().unwrap_or(0)) as usize;
    let count = a["count"].as_u64().unwrap_or(0) as usize;
    let mut max = None;
    for k in 0..count {
        let o = start + k * size;
        let val = match size {
            1 => doc.bin[o] as u64,
            2 => u16::from_le_bytes([doc.bin[o], doc.bin[o + 1]]) as u64,
            _ => u32_at(&doc.bin, o).unwrap_or(0) as u64,
        };
        max = Some(max.map_or(val, |m: u64| m.max(val)));
    }
    Ok(max)
}
