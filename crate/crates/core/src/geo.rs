//! WGS84 / Web Mercator coordinates and slippy-map tile addressing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Earth radius used by spherical Web Mercator (EPSG:3857), meters.
pub const EARTH_RADIUS_M: f64 = 6378137.0;
/// Latitude at which the Mercator world becomes square, degrees.
pub const MAX_LATITUDE_DEG: f64 = 85.05112878;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("longitude {0} outside [-180, 180]")]
    LongitudeOutOfRange(f64),
    #[error("latitude {0} outside the Mercator-projectable range")]
    LatitudeOutOfRange(f64),
    #[error("mercator coordinate ({0}, {1}) outside the projected world")]
    MercatorOutOfRange(f64, f64),
    #[error("tile {z}/{x}/{y} does not exist")]
    InvalidTile { z: u8, x: u32, y: u32 },
    #[error("zoom level {0} exceeds the supported maximum of {MAX_ZOOM}")]
    ZoomTooLarge(u32),
}

/// Highest zoom level for which tile indices fit in `u32`.
pub const MAX_ZOOM: u8 = 30;

/// Sphere used by the projection formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthModel<T> {
    pub radius: T,
    pub max_lat: T,
}

impl<T: Scalar> EarthModel<T> {
    pub fn web_mercator() -> Self {
        Self {
            radius: T::lit(EARTH_RADIUS_M),
            max_lat: T::lit(MAX_LATITUDE_DEG),
        }
    }

    /// Half the width of the projected world, `pi * R`.
    pub fn half_extent(&self) -> T {
        T::PI() * self.radius
    }
}

impl<T: Scalar> Default for EarthModel<T> {
    fn default() -> Self {
        Self::web_mercator()
    }
}

/// Longitude/latitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeoPoint<T> {
    pub lon: T,
    pub lat: T,
}

impl<T: Scalar> GeoPoint<T> {
    pub fn new(lon: T, lat: T) -> Self {
        Self { lon, lat }
    }

    /// Checks the point is finite and inside the Mercator-projectable range.
    pub fn validate(&self) -> Result<(), GeoError> {
        let earth = EarthModel::<T>::web_mercator();
        let lim = T::lit(180.0);
        if !self.lon.is_finite() || self.lon < -lim || self.lon > lim {
            return Err(GeoError::LongitudeOutOfRange(self.lon.as_f64()));
        }
        if !self.lat.is_finite() || self.lat.abs() > earth.max_lat {
            return Err(GeoError::LatitudeOutOfRange(self.lat.as_f64()));
        }
        Ok(())
    }
}

/// EPSG:3857 coordinates in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MercatorPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> MercatorPoint<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

pub fn lonlat_to_mercator<T: Scalar>(p: GeoPoint<T>) -> Result<MercatorPoint<T>, GeoError> {
    p.validate()?;
    let earth = EarthModel::<T>::web_mercator();
    let lam = p.lon.to_radians();
    let phi = p.lat.to_radians();
    Ok(MercatorPoint {
        x: earth.radius * lam,
        // asinh(tan φ) == ln(tan(π/4 + φ/2)), exact at the equator
        y: earth.radius * phi.tan().asinh(),
    })
}

pub fn mercator_to_lonlat<T: Scalar>(p: MercatorPoint<T>) -> Result<GeoPoint<T>, GeoError> {
    let earth = EarthModel::<T>::web_mercator();
    // a few ulps of slack so that projecting the world edge and back succeeds;
    // max_lat itself projects slightly beyond pi * R
    let slack = T::one() + T::epsilon() * T::lit(8.0);
    let lim_x = earth.half_extent() * slack;
    let lim_y = earth.half_extent().max(earth.radius * earth.max_lat.to_radians().tan().asinh()) * slack;
    if !p.x.is_finite() || !p.y.is_finite() || p.x.abs() > lim_x || p.y.abs() > lim_y {
        return Err(GeoError::MercatorOutOfRange(p.x.as_f64(), p.y.as_f64()));
    }
    let lon = (p.x / earth.radius).to_degrees();
    let lat = (p.y / earth.radius).sinh().atan().to_degrees();
    let c = T::lit(180.0);
    Ok(GeoPoint {
        lon: lon.max(-c).min(c),
        lat,
    })
}

/// Slippy-map tile address; `y` grows southward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileAddress {
    pub z: u8,
    pub x: u32,
    pub y: u32,
}

impl TileAddress {
    pub fn new(z: u8, x: u32, y: u32) -> Result<Self, GeoError> {
        if z > MAX_ZOOM {
            return Err(GeoError::ZoomTooLarge(z as u32));
        }
        let n = 1u64 << z;
        if (x as u64) >= n || (y as u64) >= n {
            return Err(GeoError::InvalidTile { z, x, y });
        }
        Ok(Self { z, x, y })
    }

    /// Number of tiles along one axis at this zoom.
    pub fn tiles_per_axis(&self) -> u64 {
        1u64 << self.z
    }

    pub fn children(&self) -> [TileAddress; 4] {
        let (z, x, y) = (self.z + 1, self.x * 2, self.y * 2);
        [
            TileAddress { z, x, y },
            TileAddress { z, x: x + 1, y },
            TileAddress { z, x, y: y + 1 },
            TileAddress { z, x: x + 1, y: y + 1 },
        ]
    }

    pub fn parent(&self) -> Option<TileAddress> {
        (self.z > 0).then(|| TileAddress {
            z: self.z - 1,
            x: self.x / 2,
            y: self.y / 2,
        })
    }
}

impl std::fmt::Display for TileAddress {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.z, self.x, self.y)
    }
}

/// Axis-aligned lon/lat rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBounds<T> {
    pub min_lon: T,
    pub min_lat: T,
    pub max_lon: T,
    pub max_lat: T,
}

impl<T: Scalar> GeoBounds<T> {
    pub fn new(min_lon: T, min_lat: T, max_lon: T, max_lat: T) -> Self {
        Self {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        }
    }

    /// Closed containment test.
    pub fn contains(&self, p: &GeoPoint<T>) -> bool {
        p.lon >= self.min_lon && p.lon <= self.max_lon && p.lat >= self.min_lat && p.lat <= self.max_lat
    }

    /// Closed intersection test.
    pub fn intersects(&self, other: &Self) -> bool {
        self.min_lon <= other.max_lon
            && other.min_lon <= self.max_lon
            && self.min_lat <= other.max_lat
            && other.min_lat <= self.max_lat
    }

    pub fn is_valid(&self) -> bool {
        [self.min_lon, self.min_lat, self.max_lon, self.max_lat]
            .iter()
            .all(|v| v.is_finite())
            && self.min_lon <= self.max_lon
            && self.min_lat <= self.max_lat
    }

    /// Bounding box of a point set; `None` when empty.
    pub fn from_points<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a GeoPoint<T>>,
    {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Self::new(first.lon, first.lat, first.lon, first.lat);
        for p in it {
            b.min_lon = b.min_lon.min(p.lon);
            b.max_lon = b.max_lon.max(p.lon);
            b.min_lat = b.min_lat.min(p.lat);
            b.max_lat = b.max_lat.max(p.lat);
        }
        Some(b)
    }
}

/// Axis-aligned Mercator rectangle, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MercatorBounds<T> {
    pub min_x: T,
    pub min_y: T,
    pub max_x: T,
    pub max_y: T,
}

impl<T: Scalar> MercatorBounds<T> {
    pub fn new(min_x: T, min_y: T, max_x: T, max_y: T) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn width(&self) -> T {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> T {
        self.max_y - self.min_y
    }

    pub fn center(&self) -> MercatorPoint<T> {
        let h = T::lit(0.5);
        MercatorPoint::new((self.min_x + self.max_x) * h, (self.min_y + self.max_y) * h)
    }

    /// Grows every side by `d` meters.
    pub fn expand(&self, d: T) -> Self {
        Self::new(self.min_x - d, self.min_y - d, self.max_x + d, self.max_y + d)
    }

    pub fn contains(&self, p: &MercatorPoint<T>) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    /// Inverse-projects the corners, clamping to the projectable world.
    pub fn to_geo(&self) -> GeoBounds<T> {
        let earth = EarthModel::<T>::web_mercator();
        let lim = earth.half_extent();
        let clamp = |v: T| v.max(-lim).min(lim);
        let sw = mercator_to_lonlat(MercatorPoint::new(clamp(self.min_x), clamp(self.min_y)))
            .expect("clamped point is in range");
        let ne = mercator_to_lonlat(MercatorPoint::new(clamp(self.max_x), clamp(self.max_y)))
            .expect("clamped point is in range");
        GeoBounds::new(sw.lon, sw.lat, ne.lon, ne.lat.min(earth.max_lat))
    }
}

/// Bounds of a tile in both coordinate systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileBounds<T> {
    pub geo: GeoBounds<T>,
    pub mercator: MercatorBounds<T>,
}

fn tile_edge_lon<T: Scalar>(index: u64, z: u8) -> T {
    // index / 2^z is exact, so parent and child edges agree bit for bit
    let frac = T::from_u64(index).expect("tile index representable") / T::lit((1u64 << z) as f64);
    frac * T::lit(360.0) - T::lit(180.0)
}

fn tile_edge_lat<T: Scalar>(index: u64, z: u8) -> T {
    let frac = T::from_u64(index).expect("tile index representable") / T::lit((1u64 << z) as f64);
    let two = T::lit(2.0);
    (T::PI() * (T::one() - two * frac)).sinh().atan().to_degrees()
}

fn tile_edge_merc<T: Scalar>(index: u64, z: u8) -> T {
    let earth = EarthModel::<T>::web_mercator();
    let frac = T::from_u64(index).expect("tile index representable") / T::lit((1u64 << z) as f64);
    (frac * T::lit(2.0) - T::one()) * earth.half_extent()
}

pub fn tile_bounds<T: Scalar>(t: TileAddress) -> TileBounds<T> {
    let (x, y, z) = (t.x as u64, t.y as u64, t.z);
    let geo = GeoBounds::new(
        tile_edge_lon(x, z),
        tile_edge_lat(y + 1, z),
        tile_edge_lon(x + 1, z),
        tile_edge_lat(y, z),
    );
    // Mercator y is north-positive while tile rows count southward
    let mercator = MercatorBounds::new(
        tile_edge_merc(x, z),
        -tile_edge_merc::<T>(y + 1, z),
        tile_edge_merc(x + 1, z),
        -tile_edge_merc::<T>(y, z),
    );
    TileBounds { geo, mercator }
}

pub fn lonlat_to_tile<T: Scalar>(p: GeoPoint<T>, z: u8) -> Result<TileAddress, GeoError> {
    p.validate()?;
    if z > MAX_ZOOM {
        return Err(GeoError::ZoomTooLarge(z as u32));
    }
    let n = T::lit((1u64 << z) as f64);
    let phi = p.lat.to_radians();
    let fx = (p.lon + T::lit(180.0)) / T::lit(360.0) * n;
    let fy = (T::one() - (phi.tan() + T::one() / phi.cos()).ln() / T::PI()) / T::lit(2.0) * n;
    let max = (1u64 << z) - 1;
    let clamp = |v: T| -> u32 {
        let f = v.floor();
        if f < T::zero() {
            0
        } else {
            f.to_u64().unwrap_or(max).min(max) as u32
        }
    };
    Ok(TileAddress {
        z,
        x: clamp(fx),
        y: clamp(fy),
    })
}

/// Inclusive range of tiles at zoom `z` overlapping a lon/lat box.
pub fn tiles_covering<T: Scalar>(bounds: &GeoBounds<T>, z: u8) -> Result<Vec<TileAddress>, GeoError> {
    let nw = lonlat_to_tile(GeoPoint::new(bounds.min_lon, bounds.max_lat), z)?;
    let se = lonlat_to_tile(GeoPoint::new(bounds.max_lon, bounds.min_lat), z)?;
    let mut out = Vec::with_capacity(((se.x - nw.x + 1) * (se.y - nw.y + 1)) as usize);
    for y in nw.y..=se.y {
        for x in nw.x..=se.x {
            out.push(TileAddress { z, x, y });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_projects_to_origin() {
        let m = lonlat_to_mercator(GeoPoint::new(0.0, 0.0)).unwrap();
        assert_eq!((m.x, m.y), (0.0, 0.0));
        let g = mercator_to_lonlat(MercatorPoint::new(0.0f64, 0.0)).unwrap();
        assert_eq!((g.lon, g.lat), (0.0, 0.0));
    }

    #[test]
    fn derived_projection_values() {
        // reference values from 50-digit arithmetic
        let e = lonlat_to_mercator(GeoPoint::new(180.0f64, 0.0)).unwrap();
        assert!((e.x - 20037508.342789243).abs() < 1e-7);
        assert_eq!(e.y, 0.0);
        let n = lonlat_to_mercator(GeoPoint::new(0.0f64, MAX_LATITUDE_DEG)).unwrap();
        assert!((n.y - 20_037_508.343_038_82).abs() < 1e-6);
        let back = mercator_to_lonlat(n).unwrap();
        assert!((back.lat - MAX_LATITUDE_DEG).abs() < 1e-9);
        let w = mercator_to_lonlat(MercatorPoint::new(20037508.3427892f64, 0.0)).unwrap();
        assert!((w.lon - 180.0).abs() < 1e-9);
        let nyc = lonlat_to_mercator(GeoPoint::new(-74.0060f64, 40.7128)).unwrap();
        assert!((nyc.x + 8238310.235647004).abs() < 1e-6);
        assert!((nyc.y - 4970071.579142427).abs() < 1e-6);
    }

    #[test]
    fn derived_tile_values() {
        assert_eq!(lonlat_to_tile(GeoPoint::new(-74.0060, 40.7128), 10).unwrap(), TileAddress { z: 10, x: 301, y: 385 });
        assert_eq!(lonlat_to_tile(GeoPoint::new(12.0, -33.0), 0).unwrap(), TileAddress { z: 0, x: 0, y: 0 });
        let b = tile_bounds::<f64>(TileAddress::new(10, 301, 385).unwrap());
        assert!(b.geo.contains(&GeoPoint::new(-74.0060, 40.7128)));
    }

    #[test]
    fn latitude_out_of_range_is_rejected() {
        assert!(matches!(
            lonlat_to_mercator(GeoPoint::new(0.0, 86.0)),
            Err(GeoError::LatitudeOutOfRange(_))
        ));
        assert!(lonlat_to_mercator(GeoPoint::new(f64::NAN, 0.0)).is_err());
        assert!(mercator_to_lonlat(MercatorPoint::new(3.0e7, 0.0)).is_err());
    }

    #[test]
    fn prime_meridian_goes_east() {
        // a point on the prime meridian belongs to the eastern tile at z=1
        assert_eq!(lonlat_to_tile(GeoPoint::new(0.0, 0.0), 1).unwrap(), TileAddress { z: 1, x: 1, y: 1 });
    }

    #[test]
    fn world_tile_bounds() {
        let b = tile_bounds::<f64>(TileAddress::new(0, 0, 0).unwrap());
        assert_eq!(b.geo.min_lon, -180.0);
        assert_eq!(b.geo.max_lon, 180.0);
        assert!((b.geo.max_lat - 85.0511287798).abs() < 1e-9);
        assert!((b.geo.min_lat + 85.0511287798).abs() < 1e-9);
        let q = tile_bounds::<f64>(TileAddress::new(1, 0, 0).unwrap());
        assert_eq!((q.geo.min_lon, q.geo.max_lon, q.geo.min_lat), (-180.0, 0.0, 0.0));
    }

    #[test]
    fn invalid_addresses() {
        assert!(TileAddress::new(2, 4, 0).is_err());
        assert!(TileAddress::new(31, 0, 0).is_err());
        assert!(TileAddress::new(2, 3, 3).is_ok());
    }

    #[test]
    fn f32_projection_is_usable() {
        let m = lonlat_to_mercator(GeoPoint::new(10.0f32, 45.0)).unwrap();
        let g = mercator_to_lonlat(m).unwrap();
        assert!((g.lon - 10.0).abs() < 1e-4);
        assert!((g.lat - 45.0).abs() < 1e-4);
    }
}
