//! MVT 2.1 tile codec.
//!
//! Two levels: [`RawLayer`] mirrors the protobuf messages (tag indices into
//! key/value dictionaries, raw command integers), while [`TileLayer`]
//! carries decoded paths and resolved tags.

use std::collections::HashMap;
use std::fmt;

use super::commands::{decode_commands, encode_commands, Path};
use super::wire::{Reader, Writer, WIRE_FIXED32, WIRE_FIXED64, WIRE_LEN, WIRE_VARINT};
use super::{GeomType, TilingError};

pub const MVT_VERSION: u32 = 2;
pub const DEFAULT_EXTENT: u32 = 4096;

/// Attribute value as carried in a layer's value dictionary.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    String(String),
    Float(f32),
    Double(f64),
    Int(i64),
    UInt(u64),
    SInt(i64),
    Bool(bool),
}

impl Value {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Float(v) => Some(v as f64),
            Value::Double(v) => Some(v),
            Value::Int(v) | Value::SInt(v) => Some(v as f64),
            Value::UInt(v) => Some(v as f64),
            _ => None,
        }
    }

    fn dict_key(&self) -> ValueKey {
        match self {
            Value::String(s) => ValueKey::String(s.clone()),
            Value::Float(v) => ValueKey::Float(v.to_bits()),
            Value::Double(v) => ValueKey::Double(v.to_bits()),
            Value::Int(v) => ValueKey::Int(*v),
            Value::UInt(v) => ValueKey::UInt(*v),
            Value::SInt(v) => ValueKey::SInt(*v),
            Value::Bool(v) => ValueKey::Bool(*v),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::String(s) => f.write_str(s),
            Value::Float(v) => write!(f, "{v}"),
            Value::Double(v) => write!(f, "{v}"),
            Value::Int(v) | Value::SInt(v) => write!(f, "{v}"),
            Value::UInt(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
        }
    }
}

// Bitwise identity for dictionary deduplication.
#[derive(Hash, PartialEq, Eq)]
enum ValueKey {
    String(String),
    Float(u32),
    Double(u64),
    Int(i64),
    UInt(u64),
    SInt(i64),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawFeature {
    pub id: Option<u64>,
    pub tags: Vec<u32>,
    pub geom_type: GeomType,
    pub geometry: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawLayer {
    pub version: u32,
    pub name: String,
    pub features: Vec<RawFeature>,
    pub keys: Vec<String>,
    pub values: Vec<Value>,
    pub extent: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileFeature {
    pub id: Option<u64>,
    pub geom_type: GeomType,
    pub paths: Vec<Path>,
    pub tags: Vec<(String, Value)>,
}

impl TileFeature {
    pub fn tag(&self, key: &str) -> Option<&Value> {
        self.tags.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileLayer {
    pub name: String,
    pub extent: u32,
    pub features: Vec<TileFeature>,
}

impl TileLayer {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            extent: DEFAULT_EXTENT,
            features: Vec::new(),
        }
    }

    /// Builds dictionaries (first-seen order) and command streams.
    pub fn to_raw(&self) -> Result<RawLayer, TilingError> {
        validate_extent(self.extent)?;
        let mut keys: Vec<String> = Vec::new();
        let mut values: Vec<Value> = Vec::new();
        let mut key_idx: HashMap<&str, u32> = HashMap::new();
        let mut val_idx: HashMap<ValueKey, u32> = HashMap::new();
        let mut features = Vec::with_capacity(self.features.len());
        for f in &self.features {
            let mut tags = Vec::with_capacity(f.tags.len() * 2);
            for (k, v) in &f.tags {
                let ki = *key_idx.entry(k.as_str()).or_insert_with(|| {
                    keys.push(k.clone());
                    keys.len() as u32 - 1
                });
                let vi = *val_idx.entry(v.dict_key()).or_insert_with(|| {
                    values.push(v.clone());
                    values.len() as u32 - 1
                });
                tags.push(ki);
                tags.push(vi);
            }
            features.push(RawFeature {
                id: f.id,
                tags,
                geom_type: f.geom_type,
                geometry: encode_commands(&f.paths, f.geom_type)?,
            });
        }
        Ok(RawLayer {
            version: MVT_VERSION,
            name: self.name.clone(),
            features,
            keys,
            values,
            extent: self.extent,
        })
    }

    /// Resolves tag indices and decodes command streams.
    pub fn from_raw(raw: &RawLayer) -> Result<TileLayer, TilingError> {
        let mut features = Vec::with_capacity(raw.features.len());
        for (fi, f) in raw.features.iter().enumerate() {
            if f.tags.len() % 2 != 0 {
                return Err(TilingError::Layer(format!(
                    "layer {:?} feature {fi}: odd number of tag indices",
                    raw.name
                )));
            }
            let mut tags = Vec::with_capacity(f.tags.len() / 2);
            for pair in f.tags.chunks_exact(2) {
                let k = raw.keys.get(pair[0] as usize);
                let v = raw.values.get(pair[1] as usize);
                match (k, v) {
                    (Some(k), Some(v)) => tags.push((k.clone(), v.clone())),
                    _ => {
                        return Err(TilingError::Layer(format!(
                            "layer {:?} feature {fi}: tag index ({}, {}) out of range",
                            raw.name, pair[0], pair[1]
                        )))
                    }
                }
            }
            let paths = match f.geom_type {
                GeomType::Unknown => Vec::new(),
                t => decode_commands(&f.geometry, t)?,
            };
            features.push(TileFeature {
                id: f.id,
                geom_type: f.geom_type,
                paths,
                tags,
            });
        }
        Ok(TileLayer {
            name: raw.name.clone(),
            extent: raw.extent,
            features,
        })
    }
}

fn validate_extent(extent: u32) -> Result<(), TilingError> {
    if !extent.is_power_of_two() {
        return Err(TilingError::Layer(format!("extent {extent} is not a power of two")));
    }
    Ok(())
}

pub fn encode_tile(layers: &[TileLayer]) -> Result<Vec<u8>, TilingError> {
    let mut names = std::collections::HashSet::new();
    let mut raw = Vec::with_capacity(layers.len());
    for l in layers {
        if !names.insert(l.name.as_str()) {
            return Err(TilingError::Layer(format!("duplicate layer name {:?}", l.name)));
        }
        raw.push(l.to_raw()?);
    }
    Ok(encode_raw(&raw))
}

pub fn decode_tile(bytes: &[u8]) -> Result<Vec<TileLayer>, TilingError> {
    decode_raw(bytes)?.iter().map(TileLayer::from_raw).collect()
}

/// Serializes layers with fields in ascending field-number order.
pub fn encode_raw(layers: &[RawLayer]) -> Vec<u8> {
    let mut tile = Writer::new();
    for layer in layers {
        let mut w = Writer::new();
        w.bytes_field(1, layer.name.as_bytes());
        for f in &layer.features {
            let mut fw = Writer::new();
            if let Some(id) = f.id {
                fw.varint_field(1, id);
            }
            if !f.tags.is_empty() {
                fw.packed_field(2, &f.tags);
            }
            fw.varint_field(3, f.geom_type as u64);
            if !f.geometry.is_empty() {
                fw.packed_field(4, &f.geometry);
            }
            w.bytes_field(2, &fw.buf);
        }
        for k in &layer.keys {
            w.bytes_field(3, k.as_bytes());
        }
        for v in &layer.values {
            let mut vw = Writer::new();
            match v {
                Value::String(s) => vw.bytes_field(1, s.as_bytes()),
                Value::Float(x) => vw.fixed32_field(2, x.to_bits()),
                Value::Double(x) => vw.fixed64_field(3, x.to_bits()),
                Value::Int(x) => vw.varint_field(4, *x as u64),
                Value::UInt(x) => vw.varint_field(5, *x),
                Value::SInt(x) => vw.varint_field(6, super::commands::zigzag(*x)),
                Value::Bool(x) => vw.varint_field(7, *x as u64),
            }
            w.bytes_field(4, &vw.buf);
        }
        w.varint_field(5, layer.extent as u64);
        w.varint_field(15, layer.version as u64);
        tile.bytes_field(3, &w.buf);
    }
    tile.buf
}

pub fn decode_raw(bytes: &[u8]) -> Result<Vec<RawLayer>, TilingError> {
    let mut r = Reader::new(bytes);
    let mut layers = Vec::new();
    while !r.at_end() {
        let (field, wire) = r.key()?;
        if field == 3 {
            r.expect_wire(wire, WIRE_LEN, "Tile.layers")?;
            let mut sub = r.sub()?;
            layers.push(decode_layer(&mut sub)?);
        } else {
            r.skip(wire)?;
        }
    }
    Ok(layers)
}

fn decode_layer(r: &mut Reader<'_>) -> Result<RawLayer, TilingError> {
    let start = r.offset();
    let mut name = None;
    let mut version = 1;
    let mut extent = DEFAULT_EXTENT;
    let mut features = Vec::new();
    let mut keys = Vec::new();
    let mut values = Vec::new();
    while !r.at_end() {
        let (field, wire) = r.key()?;
        match field {
            1 => {
                r.expect_wire(wire, WIRE_LEN, "Layer.name")?;
                name = Some(r.string()?);
            }
            2 => {
                r.expect_wire(wire, WIRE_LEN, "Layer.features")?;
                features.push(decode_feature(&mut r.sub()?)?);
            }
            3 => {
                r.expect_wire(wire, WIRE_LEN, "Layer.keys")?;
                keys.push(r.string()?);
            }
            4 => {
                r.expect_wire(wire, WIRE_LEN, "Layer.values")?;
                values.push(decode_value(&mut r.sub()?)?);
            }
            5 => {
                r.expect_wire(wire, WIRE_VARINT, "Layer.extent")?;
                extent = r.u32_varint()?;
            }
            15 => {
                r.expect_wire(wire, WIRE_VARINT, "Layer.version")?;
                version = r.u32_varint()?;
            }
            _ => r.skip(wire)?,
        }
    }
    let name = name.ok_or_else(|| TilingError::Parse {
        offset: start,
        message: "layer without name".into(),
    })?;
    if !(1..=2).contains(&version) {
        return Err(TilingError::Parse {
            offset: start,
            message: format!("unsupported layer version {version}"),
        });
    }
    if extent == 0 {
        return Err(TilingError::Parse {
            offset: start,
            message: "layer extent 0".into(),
        });
    }
    Ok(RawLayer {
        version,
        name,
        features,
        keys,
        values,
        extent,
    })
}

fn decode_feature(r: &mut Reader<'_>) -> Result<RawFeature, TilingError> {
    let mut f = RawFeature {
        id: None,
        tags: Vec::new(),
        geom_type: GeomType::Unknown,
        geometry: Vec::new(),
    };
    while !r.at_end() {
        let (field, wire) = r.key()?;
        match field {
            1 => {
                r.expect_wire(wire, WIRE_VARINT, "Feature.id")?;
                f.id = Some(r.varint()?);
            }
            2 => r.repeated_u32(wire, &mut f.tags)?,
            3 => {
                r.expect_wire(wire, WIRE_VARINT, "Feature.type")?;
                let at = r.offset();
                f.geom_type = GeomType::from_u64(r.varint()?).ok_or(TilingError::Parse {
                    offset: at,
                    message: "unknown geometry type".into(),
                })?;
            }
            4 => r.repeated_u32(wire, &mut f.geometry)?,
            _ => r.skip(wire)?,
        }
    }
    Ok(f)
}

fn decode_value(r: &mut Reader<'_>) -> Result<Value, TilingError> {
    let start = r.offset();
    let mut value = None;
    while !r.at_end() {
        let (field, wire) = r.key()?;
        let v = match field {
            1 => {
                r.expect_wire(wire, WIRE_LEN, "Value.string_value")?;
                Value::String(r.string()?)
            }
            2 => {
                r.expect_wire(wire, WIRE_FIXED32, "Value.float_value")?;
                Value::Float(f32::from_bits(r.fixed32()?))
            }
            3 => {
                r.expect_wire(wire, WIRE_FIXED64, "Value.double_value")?;
                Value::Double(f64::from_bits(r.fixed64()?))
            }
            4 => {
                r.expect_wire(wire, WIRE_VARINT, "Value.int_value")?;
                Value::Int(r.varint()? as i64)
            }
            5 => {
                r.expect_wire(wire, WIRE_VARINT, "Value.uint_value")?;
                Value::UInt(r.varint()?)
            }
            6 => {
                r.expect_wire(wire, WIRE_VARINT, "Value.sint_value")?;
                Value::SInt(super::commands::unzigzag(r.varint()?))
            }
            7 => {
                r.expect_wire(wire, WIRE_VARINT, "Value.bool_value")?;
                Value::Bool(r.varint()? != 0)
            }
            _ => {
                r.skip(wire)?;
                continue;
            }
        };
        value = Some(v);
    }
    value.ok_or(TilingError::Parse {
        offset: start,
        message: "value message carries no value".into(),
    })
}
