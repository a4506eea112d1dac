//! Mapbox Vector Tile (2.1) generation with temporal attributes.
//!
//! Pipeline per feature: project to Mercator, [`clip_geometry`] to the
//! buffered tile, [`quantize_geometry`] to the integer grid, then encode
//! commands and protobuf. Dates travel as `start_date` / `end_date` string
//! tags so clients can filter by time without refetching.

mod build;
mod clip;
mod commands;
mod mvt;
mod wire;

pub use build::{build_layers, build_tile, feature_span, layer_name, render_tile, TileConfig, END_DATE_TAG, START_DATE_TAG};
pub use clip::{clip_geometry, quantize_geometry, ring_area2, ClipWindow, QuantizedGeometry, DEFAULT_BUFFER};
pub use commands::{
    command, decode_commands, encode_commands, unzigzag, zigzag, Path, CMD_CLOSE_PATH, CMD_LINE_TO, CMD_MOVE_TO,
};
pub use mvt::{
    decode_raw, decode_tile, encode_raw, encode_tile, RawFeature, RawLayer, TileFeature, TileLayer, Value,
    DEFAULT_EXTENT, MVT_VERSION,
};

use crate::geo::GeoError;

#[derive(Debug, thiserror::Error)]
pub enum TilingError {
    #[error("malformed tile at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("encoding error: {0}")]
    Encode(String),
    #[error("bad geometry command at index {index}: {message}")]
    Geometry { index: usize, message: String },
    #[error("invalid layer: {0}")]
    Layer(String),
    #[error("invalid geometry: {0}")]
    Validation(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("feature {id}: {source}")]
    Feature {
        id: u64,
        #[source]
        source: Box<TilingError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum GeomType {
    Unknown = 0,
    Point = 1,
    LineString = 2,
    Polygon = 3,
}

impl GeomType {
    pub fn from_u64(v: u64) -> Option<Self> {
        Some(match v {
            0 => GeomType::Unknown,
            1 => GeomType::Point,
            2 => GeomType::LineString,
            3 => GeomType::Polygon,
            _ => return None,
        })
    }
}
