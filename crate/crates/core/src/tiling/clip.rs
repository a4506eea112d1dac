//! Clipping to the buffered tile window and quantization to tile units.

use log::debug;

use super::commands::Path;
use super::{GeomType, TilingError};
use crate::geo::{tile_bounds, GeoBounds, TileAddress, EARTH_RADIUS_M};
use crate::geometry::Geometry;
use crate::polygon::{clip_polyline_to_rect, clip_ring_to_rect, close_ring, is_closed, Point2, Rect};
use crate::scalar::Scalar;

pub const DEFAULT_BUFFER: u32 = 64;

/// Tile-local clip rectangle `[-buffer, extent + buffer]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClipWindow {
    pub extent: u32,
    pub buffer: u32,
}

impl Default for ClipWindow {
    fn default() -> Self {
        Self {
            extent: super::mvt::DEFAULT_EXTENT,
            buffer: DEFAULT_BUFFER,
        }
    }
}

impl ClipWindow {
    /// The window expressed in Mercator meters for tile `t`.
    pub fn to_mercator<T: Scalar>(&self, t: TileAddress) -> Rect<T> {
        let b = tile_bounds::<T>(t).mercator;
        let pad_x = b.width() * T::lit(self.buffer as f64) / T::lit(self.extent as f64);
        let pad_y = b.height() * T::lit(self.buffer as f64) / T::lit(self.extent as f64);
        Rect::new(b.min_x - pad_x, b.min_y - pad_y, b.max_x + pad_x, b.max_y + pad_y)
    }

    /// Lon/lat box of the window, clamped to the valid coordinate range.
    /// Used to pick candidate features before exact clipping.
    pub fn to_geo(&self, t: TileAddress) -> GeoBounds<f64> {
        let r = self.to_mercator::<f64>(t);
        let lon = |x: f64| (x / EARTH_RADIUS_M).to_degrees().clamp(-180.0, 180.0);
        let lat = |y: f64| (y / EARTH_RADIUS_M).sinh().atan().to_degrees();
        GeoBounds::new(lon(r.min.x), lat(r.min.y), lon(r.max.x), lat(r.max.y))
    }
}

/// Clips Mercator geometry to a rectangle. Polygon rings must be closed;
/// output rings are closed again. The result may be empty.
pub fn clip_geometry<T: Scalar>(geom: &Geometry<T>, window: &Rect<T>) -> Result<Geometry<T>, TilingError> {
    Ok(match geom {
        Geometry::Point(pts) => Geometry::Point(pts.iter().copied().filter(|p| window.contains(*p)).collect()),
        Geometry::LineString(lines) => {
            Geometry::LineString(lines.iter().flat_map(|l| clip_polyline_to_rect(l, window)).collect())
        }
        Geometry::Polygon(rings) => {
            for (i, r) in rings.iter().enumerate() {
                if !is_closed(r) {
                    return Err(TilingError::Validation(format!("polygon ring {i} is not closed")));
                }
            }
            let mut out = Vec::new();
            for (i, r) in rings.iter().enumerate() {
                let clipped = clip_ring_to_rect(r, window);
                if clipped.len() < 3 {
                    if i == 0 {
                        // exterior gone: holes cannot survive it
                        break;
                    }
                    continue;
                }
                out.push(close_ring(&clipped));
            }
            Geometry::Polygon(out)
        }
    })
}

/// Integer tile-local geometry ready for command encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedGeometry {
    pub geom_type: GeomType,
    pub paths: Vec<Path>,
}

/// Maps Mercator geometry onto the tile grid (y down), rounding to the
/// nearest unit. Degenerate parts are dropped; polygon winding is
/// normalized so exteriors have positive y-down area. Returns `None` if
/// nothing survives.
pub fn quantize_geometry<T: Scalar>(geom: &Geometry<T>, t: TileAddress, extent: u32) -> Option<QuantizedGeometry> {
    let b = tile_bounds::<T>(t).mercator;
    let ext = T::lit(extent as f64);
    let sx = ext / b.width();
    let sy = ext / b.height();
    let q = |p: &Point2<T>| -> [i32; 2] {
        let x = ((p.x - b.min_x) * sx).round();
        let y = ((b.max_y - p.y) * sy).round();
        [
            x.to_i32().unwrap_or(if x > T::zero() { i32::MAX } else { i32::MIN }),
            y.to_i32().unwrap_or(if y > T::zero() { i32::MAX } else { i32::MIN }),
        ]
    };
    let quantize_path = |path: &[Point2<T>]| -> Path {
        let mut out: Path = path.iter().map(q).collect();
        out.dedup();
        out
    };
    let (geom_type, paths) = match geom {
        Geometry::Point(pts) => {
            let mut paths: Vec<Path> = pts.iter().map(|p| vec![q(p)]).collect();
            paths.dedup();
            (GeomType::Point, paths)
        }
        Geometry::LineString(lines) => {
            let paths = lines
                .iter()
                .map(|l| quantize_path(l))
                .filter(|p| {
                    let keep = p.len() >= 2;
                    if !keep {
                        debug!("dropping line collapsed to a point in tile {t}");
                    }
                    keep
                })
                .collect();
            (GeomType::LineString, paths)
        }
        Geometry::Polygon(rings) => {
            let mut paths = Vec::new();
            for (i, ring) in rings.iter().enumerate() {
                let mut p = quantize_path(ring);
                while p.len() > 1 && p.first() == p.last() {
                    p.pop();
                }
                let area2 = ring_area2(&p);
                if distinct(&p) < 3 || area2 == 0 {
                    debug!("dropping ring {i} collapsed under quantization in tile {t}");
                    if i == 0 {
                        break;
                    }
                    continue;
                }
                let want_positive = i == 0;
                if (area2 > 0) != want_positive {
                    p.reverse();
                }
                paths.push(p);
            }
            (GeomType::Polygon, paths)
        }
    };
    if paths.is_empty() {
        return None;
    }
    Some(QuantizedGeometry { geom_type, paths })
}

/// Twice the shoelace area with y pointing down (positive = clockwise on screen).
pub fn ring_area2(ring: &[[i32; 2]]) -> i64 {
    let n = ring.len();
    let mut s: i64 = 0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a[0] as i64 * b[1] as i64 - b[0] as i64 * a[1] as i64;
    }
    s
}

fn distinct(ring: &[[i32; 2]]) -> usize {
    let mut v = ring.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}
