//! Spatiotemporal map engine.
//!
//! The crate covers the whole pipeline from scanned map to 3D city:
//!
//! * [`geo`] and [`time`]: Web Mercator math, slippy tiles, calendar dates.
//! * [`georectify`]: fit pixel -> Mercator transforms from control points
//!   and warp scans into place.
//! * [`store`]: validated, time-stamped features with an append-only log
//!   and a grid index.
//! * [`tiling`]: Mapbox Vector Tile 2.1 encoding with date attributes.
//! * [`facade`]: rectify annotated facade photos and regularize their
//!   window grids.
//! * [`reconstruct`]: footprint extrusion, procedural facade components
//!   and GLB export.
//!
//! Geometric code is generic over [`Scalar`] (`f32` or `f64`); the type
//! aliases below fix it to `f64`, which is what the rest of the crate and
//! the binaries use.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod geo;
pub mod geometry;
pub mod georectify;
pub mod linalg;
pub mod facade;
pub mod polygon;
pub mod reconstruct;
pub mod scalar;
pub mod store;
pub mod tiling;
pub mod time;

pub use geometry::Geometry;
pub use scalar::Scalar;
pub use time::{Date, TimeSpan};

pub type GeoPoint = geo::GeoPoint<f64>;
pub type MercatorPoint = geo::MercatorPoint<f64>;
pub type GeoBounds = geo::GeoBounds<f64>;
pub type MercatorBounds = geo::MercatorBounds<f64>;
pub type Point2 = polygon::Point2<f64>;
pub type Transform2D = georectify::Transform2D<f64>;
pub type ControlPointPair = georectify::ControlPointPair<f64>;
