//! Control-point georectification: transform fitting and raster warping.

mod fit;
mod io;
mod raster;
mod transform;

pub use fit::{fit_inverse, fit_transform, residual_report, ControlPointPair, PairResidual, ResidualReport};
pub use io::{read_control_points, read_transform, write_control_points, write_transform};
pub use raster::{warp_raster, OutputGrid, RasterImage, Resampling};
pub use transform::{monomial_count, monomial_exponents, parse_transform_kind, Transform2D, TransformKind};

use thiserror::Error;

use crate::geo::GeoError;

#[derive(Debug, Error)]
pub enum GeorectifyError {
    #[error("{kind} fit needs at least {needed} control point pairs, got {got}")]
    Arity { kind: String, needed: usize, got: usize },
    #[error("degenerate control point configuration: {0}")]
    Degenerate(String),
    #[error("control point pair {index}: {reason}")]
    InvalidPair { index: usize, reason: String },
    #[error("no control point pairs to evaluate")]
    NoPairs,
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("output grid has zero area")]
    ZeroAreaGrid,
    #[error("raster has {got} samples, expected {expected}")]
    RasterSize { expected: usize, got: usize },
    #[error("unsupported channel count {0}; expected 1 or 4")]
    Channels(u8),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}
