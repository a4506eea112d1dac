//! Feature geometry shared by the store, the tiler and the reconstructor.

use serde::{Deserialize, Serialize};

use crate::polygon::Point2;
use crate::scalar::Scalar;

/// Point, line or polygon geometry.
///
/// Polygon rings are closed (first vertex repeated at the end); the first
/// ring is the exterior, the rest are holes. Clipping may split a line
/// into several parts, hence the `Vec` of lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Geometry<T> {
    Point(Vec<Point2<T>>),
    LineString(Vec<Vec<Point2<T>>>),
    Polygon(Vec<Vec<Point2<T>>>),
}

impl<T: Scalar> Geometry<T> {
    pub fn is_empty(&self) -> bool {
        match self {
            Geometry::Point(p) => p.is_empty(),
            Geometry::LineString(l) => l.iter().all(|l| l.len() < 2),
            Geometry::Polygon(r) => r.first().is_none_or(|r| r.len() < 3),
        }
    }

    pub fn points(&self) -> Box<dyn Iterator<Item = &Point2<T>> + '_> {
        match self {
            Geometry::Point(p) => Box::new(p.iter()),
            Geometry::LineString(l) | Geometry::Polygon(l) => Box::new(l.iter().flatten()),
        }
    }

    /// Applies `f` to every vertex.
    pub fn try_map<U, E>(&self, mut f: impl FnMut(Point2<T>) -> Result<Point2<U>, E>) -> Result<Geometry<U>, E> {
        let mut map_path = |p: &Vec<Point2<T>>| p.iter().map(|q| f(*q)).collect::<Result<Vec<_>, E>>();
        Ok(match self {
            Geometry::Point(p) => Geometry::Point(map_path(p)?),
            Geometry::LineString(l) => Geometry::LineString(l.iter().map(&mut map_path).collect::<Result<_, E>>()?),
            Geometry::Polygon(r) => Geometry::Polygon(r.iter().map(&mut map_path).collect::<Result<_, E>>()?),
        })
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Geometry::Point(_) => "point",
            Geometry::LineString(_) => "linestring",
            Geometry::Polygon(_) => "polygon",
        }
    }
}
