//! Footprints, extrusion and the facade-to-wall mapping.

use log::debug;

use super::mesh::Mesh;
use super::ReconstructError;
use crate::geo::{lonlat_to_mercator, GeoPoint, MercatorPoint};
use crate::geometry::Geometry;
use crate::polygon::{check_simple_ring, is_closed, signed_area, triangulate, Point2};
use crate::store::Feature;

/// Polygon footprint in lon/lat; rings closed, exterior first.
#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    pub rings: Vec<Vec<GeoPoint<f64>>>,
}

impl Footprint {
    pub fn new(rings: Vec<Vec<GeoPoint<f64>>>) -> Result<Self, ReconstructError> {
        if rings.is_empty() {
            return Err(ReconstructError::Geometry("footprint has no rings".into()));
        }
        for (i, r) in rings.iter().enumerate() {
            for p in r {
                p.validate().map_err(|e| ReconstructError::Geometry(e.to_string()))?;
            }
            let pts: Vec<Point2<f64>> = r.iter().map(|p| Point2::new(p.lon, p.lat)).collect();
            if !is_closed(&pts) {
                return Err(ReconstructError::Geometry(format!("ring {i} is not closed")));
            }
            check_simple_ring(&pts).map_err(|d| ReconstructError::Geometry(format!("ring {i}: {d}")))?;
        }
        Ok(Self { rings })
    }

    pub fn from_feature(f: &Feature) -> Result<Self, ReconstructError> {
        match &f.geometry {
            Geometry::Polygon(rings) => Self::new(
                rings
                    .iter()
                    .map(|r| r.iter().map(|p| GeoPoint::new(p.x, p.y)).collect())
                    .collect(),
            ),
            other => Err(ReconstructError::Geometry(format!(
                "feature {} is a {}, not a polygon",
                f.id,
                other.type_name()
            ))),
        }
    }

    /// Projects to Mercator, centers on the exterior's area centroid and
    /// orients the exterior counter-clockwise, holes clockwise.
    pub fn to_local(&self) -> Result<LocalFootprint, ReconstructError> {
        let merc: Vec<Vec<Point2<f64>>> = self
            .rings
            .iter()
            .map(|r| {
                let open = if r.len() >= 2 && r[0] == r[r.len() - 1] { &r[..r.len() - 1] } else { &r[..] };
                open.iter()
                    .map(|p| {
                        let m = lonlat_to_mercator(*p).map_err(|e| ReconstructError::Geometry(e.to_string()))?;
                        Ok(Point2::new(m.x, m.y))
                    })
                    .collect::<Result<Vec<_>, ReconstructError>>()
            })
            .collect::<Result<_, _>>()?;
        // centroid relative to the first vertex keeps the arithmetic small
        let o = merc[0][0];
        let rel: Vec<Point2<f64>> = merc[0].iter().map(|p| p.sub(o)).collect();
        let area = signed_area(&rel);
        if area == 0.0 {
            return Err(ReconstructError::Geometry("exterior ring has zero area".into()));
        }
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..rel.len() {
            let (a, b) = (rel[i], rel[(i + 1) % rel.len()]);
            let cr = a.cross(b);
            cx += (a.x + b.x) * cr;
            cy += (a.y + b.y) * cr;
        }
        let centroid = Point2::new(o.x + cx / (6.0 * area), o.y + cy / (6.0 * area));
        let anchor = MercatorPoint::new(centroid.x, centroid.y);
        let reversed = area < 0.0;
        if reversed {
            debug!("footprint exterior is clockwise; reversing");
        }
        let rings = merc
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let mut local: Vec<Point2<f64>> = r.iter().map(|p| p.sub(centroid)).collect();
                let ccw = signed_area(&local) > 0.0;
                if (i == 0) != ccw {
                    local.reverse();
                }
                local
            })
            .collect();
        Ok(LocalFootprint { anchor, rings, reversed })
    }
}

/// Footprint in local Mercator meters around `anchor`; open rings, exterior
/// counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFootprint {
    pub anchor: MercatorPoint<f64>,
    pub rings: Vec<Vec<Point2<f64>>>,
    /// Whether the exterior was clockwise in the input.
    pub reversed: bool,
}

impl LocalFootprint {
    pub fn edge_count(&self) -> usize {
        self.rings[0].len()
    }

    /// Exterior edge `index` in the input's vertex numbering (from vertex
    /// `index` to `index + 1`), returned in counter-clockwise order so the
    /// wall reads left to right from outside.
    pub fn edge(&self, index: usize) -> Option<(Point2<f64>, Point2<f64>)> {
        let r = &self.rings[0];
        let n = r.len();
        if index >= n {
            return None;
        }
        if self.reversed {
            // input vertex k sits at n - 1 - k after reversal
            let a = r[n - 1 - index];
            let b = r[(2 * n - 2 - index) % n];
            Some((b, a))
        } else {
            Some((r[index], r[(index + 1) % n]))
        }
    }
}

/// Extrudes a footprint into a closed prism of height `h`. Bottom and top
/// rings share vertices with the walls so hole-free footprints are
/// watertight.
pub fn extrude_footprint(fp: &Footprint, h: f64) -> Result<Mesh, ReconstructError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ReconstructError::Domain(format!("extrusion height must be positive, got {h}")));
    }
    let local = fp.to_local()?;
    Ok(extrude_local(&local, h))
}

pub(crate) fn extrude_local(local: &LocalFootprint, h: f64) -> Mesh {
    let n_total: usize = local.rings.iter().map(Vec::len).sum();
    let mut verts: Vec<[f64; 3]> = Vec::with_capacity(2 * n_total);
    for z in [0.0, h] {
        for r in &local.rings {
            verts.extend(r.iter().map(|p| [p.x, p.y, z]));
        }
    }
    let top = n_total as u32;
    let mut tris: Vec<[u32; 3]> = Vec::new();
    let mut start = 0u32;
    for r in &local.rings {
        let n = r.len() as u32;
        for i in 0..n {
            let (a, b) = (start + i, start + (i + 1) % n);
            tris.push([a, b, b + top]);
            tris.push([a, b + top, a + top]);
        }
        start += n;
    }
    let cap = triangulate(&local.rings);
    for t in &cap {
        tris.push([t[0] as u32 + top, t[1] as u32 + top, t[2] as u32 + top]);
    }
    for t in &cap {
        tris.push([t[0] as u32, t[2] as u32, t[1] as u32]);
    }
    let mut mesh = Mesh::new(local.anchor);
    mesh.push_part("extrusion", None, verts, tris);
    mesh
}

/// Linear map from facade coordinates (x right, y up, origin bottom-left)
/// onto a wall face, plus its outward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacadeFrame {
    pub origin: [f64; 3],
    /// World displacement per facade unit along x.
    pub along: [f64; 3],
    /// World displacement per facade unit along y.
    pub up: [f64; 3],
    /// Unit outward normal.
    pub normal: [f64; 3],
}

impl FacadeFrame {
    pub fn apply(&self, x: f64, y: f64) -> [f64; 3] {
        self.apply_depth(x, y, 0.0)
    }

    /// Point at facade `(x, y)` offset `depth` meters out of the wall.
    pub fn apply_depth(&self, x: f64, y: f64, depth: f64) -> [f64; 3] {
        let mut p = self.origin;
        for k in 0..3 {
            p[k] += self.along[k] * x + self.up[k] * y + self.normal[k] * depth;
        }
        p
    }
}

/// Maps a `width x height` facade rectangle onto exterior edge `edge` of the
/// footprint, stretched to the full wall: `(0, 0)` to the edge start at
/// ground level, `(width, 0)` to the edge end, `(., height)` to the roof.
pub fn facade_to_world(
    width: f64,
    height: f64,
    edge: usize,
    fp: &LocalFootprint,
    h: f64,
) -> Result<FacadeFrame, ReconstructError> {
    if !(width > 0.0 && height > 0.0) {
        return Err(ReconstructError::Domain(format!("facade rectangle {width}x{height} has no area")));
    }
    let (a, b) = fp.edge(edge).ok_or_else(|| {
        ReconstructError::Domain(format!("edge {edge} out of range (footprint has {})", fp.edge_count()))
    })?;
    let d = b.sub(a);
    let len = d.norm();
    if !(len > 0.0) {
        return Err(ReconstructError::Geometry(format!("edge {edge} has zero length")));
    }
    Ok(FacadeFrame {
        origin: [a.x, a.y, 0.0],
        along: [d.x / width, d.y / width, 0.0],
        up: [0.0, 0.0, h / height],
        normal: [d.y / len, -d.x / len, 0.0],
    })
}
