//! Spatiotemporal overlap detection between buildings.

use serde::Serialize;

use super::{FeatureKind, StoreSnapshot};
use crate::geo::{lonlat_to_mercator, GeoPoint};
use crate::geometry::Geometry;
use crate::polygon::{intersection_area, Point2};
use crate::time::TimeSpan;

/// Overlaps at or below this area (Mercator m²) are ignored as tracing jitter.
pub const OVERLAP_EPSILON_M2: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapConflict {
    /// Smaller id first.
    pub a: u64,
    pub b: u64,
    pub area_m2: f64,
    pub span: TimeSpan,
}

/// Reports every unordered pair of buildings whose footprints share more
/// than [`OVERLAP_EPSILON_M2`] and whose lifetimes intersect, sorted by ids.
pub fn check_overlaps(snap: &StoreSnapshot) -> Vec<OverlapConflict> {
    let features = snap.features();
    // project each building once, relative to its own first vertex
    let projected: Vec<Option<(Point2<f64>, Vec<Vec<Point2<f64>>>)>> = features
        .iter()
        .map(|f| {
            let Geometry::Polygon(rings) = &f.geometry else {
                return None;
            };
            if f.kind != FeatureKind::Building {
                return None;
            }
            let merc: Vec<Vec<Point2<f64>>> = rings
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|p| {
                            let m = lonlat_to_mercator(GeoPoint::new(p.x, p.y)).expect("validated coordinates");
                            Point2::new(m.x, m.y)
                        })
                        .collect()
                })
                .collect();
            Some((merc[0][0], merc))
        })
        .collect();
    let mut out = Vec::new();
    for (i, f) in features.iter().enumerate() {
        let Some((origin, poly_a)) = &projected[i] else {
            continue;
        };
        let shift = |rings: &Vec<Vec<Point2<f64>>>| -> Vec<Vec<Point2<f64>>> {
            rings.iter().map(|r| r.iter().map(|p| p.sub(*origin)).collect()).collect()
        };
        let local_a = shift(poly_a);
        for j in snap.candidate_slots(&snap.bounds_of(i)) {
            let j = j as usize;
            if j <= i {
                continue;
            }
            let Some((_, poly_b)) = &projected[j] else {
                continue;
            };
            let g = &features[j];
            if !snap.bounds_of(i).intersects(&snap.bounds_of(j)) {
                continue;
            }
            let Some(span) = f.span.intersection(&g.span) else {
                continue;
            };
            let area = intersection_area(&local_a, &shift(poly_b));
            if area > OVERLAP_EPSILON_M2 {
                out.push(OverlapConflict {
                    a: f.id.min(g.id),
                    b: f.id.max(g.id),
                    area_m2: area,
                    span,
                });
            }
        }
    }
    out.sort_by_key(|c| (c.a, c.b));
    out
}
