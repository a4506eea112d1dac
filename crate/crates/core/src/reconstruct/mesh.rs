//! Indexed triangle meshes with tagged parts.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::Range;

use super::components::ComponentKind;
use crate::geo::MercatorPoint;

/// A contiguous part of a mesh: its vertices and triangles are ranges of
/// the parent arrays, and its triangles only reference its own vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshGroup {
    pub tag: String,
    /// `None` for the footprint extrusion.
    pub kind: Option<ComponentKind>,
    pub vertices: Range<usize>,
    pub triangles: Range<usize>,
}

/// Local z-up mesh in meters; `anchor` is the Mercator position of the
/// local origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    pub groups: Vec<MeshGroup>,
    pub anchor: MercatorPoint<f64>,
}

impl Mesh {
    pub fn new(anchor: MercatorPoint<f64>) -> Self {
        Self {
            vertices: Vec::new(),
            triangles: Vec::new(),
            groups: Vec::new(),
            anchor,
        }
    }

    /// Builds a single-group mesh from part-local indices.
    pub fn from_part(tag: &str, kind: Option<ComponentKind>, vertices: Vec<[f64; 3]>, triangles: Vec<[u32; 3]>) -> Self {
        let mut m = Mesh::new(MercatorPoint::new(0.0, 0.0));
        m.push_part(tag, kind, vertices, triangles);
        m
    }

    /// Appends a part whose triangle indices are relative to `vertices`.
    pub fn push_part(&mut self, tag: &str, kind: Option<ComponentKind>, vertices: Vec<[f64; 3]>, triangles: Vec<[u32; 3]>) {
        let v0 = self.vertices.len();
        let t0 = self.triangles.len();
        let base = v0 as u32;
        self.vertices.extend(vertices);
        self.triangles
            .extend(triangles.into_iter().map(|[a, b, c]| [a + base, b + base, c + base]));
        self.groups.push(MeshGroup {
            tag: tag.to_string(),
            kind,
            vertices: v0..self.vertices.len(),
            triangles: t0..self.triangles.len(),
        });
    }

    /// Appends every group of `other` after mapping its vertices through `f`.
    pub fn append_mapped(&mut self, other: &Mesh, tag: &str, f: impl Fn([f64; 3]) -> [f64; 3]) {
        for g in &other.groups {
            let verts = other.vertices[g.vertices.clone()].iter().map(|v| f(*v)).collect();
            let base = g.vertices.start as u32;
            let tris = other.triangles[g.triangles.clone()]
                .iter()
                .map(|t| [t[0] - base, t[1] - base, t[2] - base])
                .collect();
            self.push_part(tag, g.kind, verts, tris);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.vertices.len() as u32;
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(format!("triangle {t:?} indexes past {n} vertices"));
        }
        if self.vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err("non-finite vertex coordinate".into());
        }
        Ok(())
    }

    /// Signed volume by the divergence theorem; positive for outward-facing
    /// closed meshes.
    pub fn signed_volume(&self) -> f64 {
        signed_volume(&self.vertices, &self.triangles)
    }

    pub fn group_volume(&self, g: &MeshGroup) -> f64 {
        signed_volume(&self.vertices, &self.triangles[g.triangles.clone()])
    }

    /// True when every undirected edge of the given triangles is shared by
    /// exactly two of them, used in opposite directions.
    pub fn is_watertight(&self, triangles: &[[u32; 3]]) -> bool {
        let mut edges: HashMap<(u32, u32), i32> = HashMap::new();
        for t in triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += if a < b { 1 } else { -1 };
            }
        }
        let mut count: HashMap<(u32, u32), usize> = HashMap::new();
        for t in triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        count.values().all(|&c| c == 2) && edges.values().all(|&s| s == 0)
    }

    /// ASCII OBJ with positions and faces only, y-up like the GLB.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# anchor {} {}", self.anchor.x, self.anchor.y);
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v[0], v[2], -v[1]);
        }
        for g in &self.groups {
            let _ = writeln!(s, "g {}", g.tag);
            for t in &self.triangles[g.triangles.clone()] {
                let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
            }
        }
        s
    }
}

pub(crate) fn signed_volume(vertices: &[[f64; 3]], triangles: &[[u32; 3]]) -> f64 {
    let mut v6 = 0.0;
    for t in triangles {
        let a = vertices[t[0] as usize];
        let b = vertices[t[1] as usize];
        let c = vertices[t[2] as usize];
        v6 += a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
    }
    v6 / 6.0
}

/// Closed axis-aligned box `[min, max]`, 8 vertices and 12 outward triangles.
pub(crate) fn box_part(min: [f64; 3], max: [f64; 3]) -> (Vec<[f64; 3]>, Vec<[u32; 3]>) {
    let v = (0..8)
        .map(|i| {
            [
                if i & 1 == 0 { min[0] } else { max[0] },
                if i & 2 == 0 { min[1] } else { max[1] },
                if i & 4 == 0 { min[2] } else { max[2] },
            ]
        })
        .collect();
    let t = vec![
        [0, 2, 3],
        [0, 3, 1], // z = min
        [4, 5, 7],
        [4, 7, 6], // z = max
        [0, 1, 5],
        [0, 5, 4], // y = min
        [2, 6, 7],
        [2, 7, 3], // y = max
        [0, 4, 6],
        [0, 6, 2], // x = min
        [1, 3, 7],
        [1, 7, 5], // x = max
    ];
    (v, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_volume_and_closure() {
        let (v, t) = box_part([0.0, 0.0, 0.0], [1.0, 2.0, 3.0]);
        let m = Mesh::from_part("b", None, v, t);
        assert!((m.signed_volume() - 6.0).abs() < 1e-12);
        assert!(m.is_watertight(&m.triangles));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn obj_lists_faces() {
        let (v, t) = box_part([0.0; 3], [1.0; 3]);
        let obj = Mesh::from_part("b", None, v, t).to_obj();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 12);
    }
}
