//! Procedural facade component templates.
//!
//! Component frame: x along the wall (0..width), y up (0..height), z out of
//! the wall. Recessed parts extend to negative z, protruding ones to
//! positive z.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mesh::{box_part, Mesh};
use super::{ReconstructError, ReconstructParams};
use crate::facade::FacadeLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Window,
    Entry,
    Storefront,
    Stair,
    Sill,
    Cornice,
    RoofCornice,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Window => "window",
            ComponentKind::Entry => "entry",
            ComponentKind::Storefront => "storefront",
            ComponentKind::Stair => "stair",
            ComponentKind::Sill => "sill",
            ComponentKind::Cornice => "cornice",
            ComponentKind::RoofCornice => "roof_cornice",
        }
    }

    /// Flat display color, linear RGBA.
    pub fn color(kind: Option<ComponentKind>) -> [f32; 4] {
        match kind {
            None => [0.80, 0.78, 0.72, 1.0],
            Some(ComponentKind::Window) => [0.25, 0.45, 0.85, 1.0],
            Some(ComponentKind::Entry) | Some(ComponentKind::Storefront) => [0.55, 0.30, 0.15, 1.0],
            Some(ComponentKind::Stair) => [0.50, 0.50, 0.50, 1.0],
            Some(ComponentKind::Sill) | Some(ComponentKind::Cornice) | Some(ComponentKind::RoofCornice) => {
                [0.95, 0.93, 0.85, 1.0]
            }
        }
    }
}

impl From<FacadeLabel> for ComponentKind {
    fn from(l: FacadeLabel) -> Self {
        match l {
            FacadeLabel::Window => ComponentKind::Window,
            FacadeLabel::WindowSill => ComponentKind::Sill,
            FacadeLabel::Cornice => ComponentKind::Cornice,
            FacadeLabel::RoofCornice => ComponentKind::RoofCornice,
            FacadeLabel::Storefront => ComponentKind::Storefront,
            FacadeLabel::Entry => ComponentKind::Entry,
            FacadeLabel::Stair => ComponentKind::Stair,
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComponentKind {
    type Err = ReconstructError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "window" => ComponentKind::Window,
            "entry" | "door" => ComponentKind::Entry,
            "storefront" => ComponentKind::Storefront,
            "stair" | "stairs" => ComponentKind::Stair,
            "sill" | "window_sill" => ComponentKind::Sill,
            "cornice" => ComponentKind::Cornice,
            "roof_cornice" => ComponentKind::RoofCornice,
            other => return Err(ReconstructError::UnsupportedKind(other.to_string())),
        })
    }
}

#[derive(Default)]
struct Builder {
    v: Vec<[f64; 3]>,
    t: Vec<[u32; 3]>,
}

impl Builder {
    /// Planar quad, wound so its normal agrees with `facing`.
    fn quad(&mut self, p: [[f64; 3]; 4], facing: [f64; 3]) {
        let e1 = sub(p[1], p[0]);
        let e2 = sub(p[2], p[0]);
        let n = [
            e1[1] * e2[2] - e1[2] * e2[1],
            e1[2] * e2[0] - e1[0] * e2[2],
            e1[0] * e2[1] - e1[1] * e2[0],
        ];
        let flip = n[0] * facing[0] + n[1] * facing[1] + n[2] * facing[2] < 0.0;
        let b = self.v.len() as u32;
        self.v.extend_from_slice(&p);
        if flip {
            self.t.push([b, b + 2, b + 1]);
            self.t.push([b, b + 3, b + 2]);
        } else {
            self.t.push([b, b + 1, b + 2]);
            self.t.push([b, b + 2, b + 3]);
        }
    }

    /// Axis-aligned rectangle in a constant-z plane.
    fn rect_z(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, z: f64, facing: f64) {
        self.quad([[x0, y0, z], [x1, y0, z], [x1, y1, z], [x0, y1, z]], [0.0, 0.0, facing]);
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn frame_width(w: f64, h: f64) -> f64 {
    (0.1 * w.min(h)).min(0.08)
}

/// Window: frame ring (8 triangles), reveals (8), back pane (2) and two
/// double-sided muntins (4 + 4); 26 triangles in `[0,w] x [0,h] x [-r,0]`.
fn window(w: f64, h: f64, r: f64) -> Builder {
    let f = frame_width(w, h);
    let mut b = Builder::default();
    let (xi0, xi1, yi0, yi1) = (f, w - f, f, h - f);
    let up = 1.0;
    // frame ring
    b.quad([[0.0, 0.0, 0.0], [w, 0.0, 0.0], [xi1, yi0, 0.0], [xi0, yi0, 0.0]], [0.0, 0.0, up]);
    b.quad([[w, 0.0, 0.0], [w, h, 0.0], [xi1, yi1, 0.0], [xi1, yi0, 0.0]], [0.0, 0.0, up]);
    b.quad([[w, h, 0.0], [0.0, h, 0.0], [xi0, yi1, 0.0], [xi1, yi1, 0.0]], [0.0, 0.0, up]);
    b.quad([[0.0, h, 0.0], [0.0, 0.0, 0.0], [xi0, yi0, 0.0], [xi0, yi1, 0.0]], [0.0, 0.0, up]);
    // reveals face into the opening
    b.quad([[xi0, yi0, 0.0], [xi1, yi0, 0.0], [xi1, yi0, -r], [xi0, yi0, -r]], [0.0, 1.0, 0.0]);
    b.quad([[xi0, yi1, 0.0], [xi1, yi1, 0.0], [xi1, yi1, -r], [xi0, yi1, -r]], [0.0, -1.0, 0.0]);
    b.quad([[xi0, yi0, 0.0], [xi0, yi1, 0.0], [xi0, yi1, -r], [xi0, yi0, -r]], [1.0, 0.0, 0.0]);
    b.quad([[xi1, yi0, 0.0], [xi1, yi1, 0.0], [xi1, yi1, -r], [xi1, yi0, -r]], [-1.0, 0.0, 0.0]);
    b.rect_z(xi0, yi0, xi1, yi1, -r, 1.0);
    // muntins
    let m = f * 0.5;
    let (cx, cy, zm) = (w * 0.5, h * 0.5, -r * 0.5);
    for facing in [1.0, -1.0] {
        b.rect_z(cx - m * 0.5, yi0, cx + m * 0.5, yi1, zm, facing);
    }
    for facing in [1.0, -1.0] {
        b.rect_z(xi0, cy - m * 0.5, xi1, cy + m * 0.5, zm, facing);
    }
    b
}

/// Door-like opening reaching the bottom edge: three-sided frame (6),
/// reveals (6) and back panel (2); 14 triangles.
fn entry(w: f64, h: f64, r: f64) -> Builder {
    let f = frame_width(w, h);
    let mut b = Builder::default();
    let (xi0, xi1, yt) = (f, w - f, h - f);
    b.rect_z(0.0, 0.0, xi0, yt, 0.0, 1.0);
    b.rect_z(xi1, 0.0, w, yt, 0.0, 1.0);
    b.rect_z(0.0, yt, w, h, 0.0, 1.0);
    b.quad([[xi0, 0.0, 0.0], [xi0, yt, 0.0], [xi0, yt, -r], [xi0, 0.0, -r]], [1.0, 0.0, 0.0]);
    b.quad([[xi1, 0.0, 0.0], [xi1, yt, 0.0], [xi1, yt, -r], [xi1, 0.0, -r]], [-1.0, 0.0, 0.0]);
    b.quad([[xi0, yt, 0.0], [xi1, yt, 0.0], [xi1, yt, -r], [xi0, yt, -r]], [0.0, -1.0, 0.0]);
    b.rect_z(xi0, 0.0, xi1, yt, -r, 1.0);
    b
}

fn boxes(parts: &[([f64; 3], [f64; 3])]) -> Builder {
    let mut b = Builder::default();
    for (lo, hi) in parts {
        let (v, t) = box_part(*lo, *hi);
        let base = b.v.len() as u32;
        b.v.extend(v);
        b.t.extend(t.into_iter().map(|[x, y, z]| [x + base, y + base, z + base]));
    }
    b
}

/// Number of steps needed to climb `height` with the configured rise.
pub(crate) fn stair_steps(height: f64, rise: f64) -> usize {
    // tolerate representation error, e.g. 0.54 / 0.18 = 3.0000000000000004
    ((height / rise) - 1e-9).ceil().max(1.0) as usize
}

/// Canonical mesh for one component of the given size.
pub fn generate_component(
    kind: ComponentKind,
    width: f64,
    height: f64,
    params: &ReconstructParams,
) -> Result<Mesh, ReconstructError> {
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(ReconstructError::Domain(format!(
            "{kind} dimensions must be positive, got {width} x {height}"
        )));
    }
    let b = match kind {
        ComponentKind::Window => window(width, height, params.window_recess),
        ComponentKind::Entry | ComponentKind::Storefront => entry(width, height, params.window_recess),
        ComponentKind::Stair => {
            let n = stair_steps(height, params.stair_rise);
            let rise = height / n as f64;
            let parts: Vec<_> = (0..n)
                .map(|k| {
                    (
                        [0.0, k as f64 * rise, 0.0],
                        [width, (k + 1) as f64 * rise, (n - k) as f64 * params.stair_run],
                    )
                })
                .collect();
            boxes(&parts)
        }
        ComponentKind::Sill => boxes(&[([0.0, 0.0, 0.0], [width, height, params.sill_protrusion])]),
        ComponentKind::Cornice | ComponentKind::RoofCornice => {
            boxes(&[([0.0, 0.0, 0.0], [width, height, params.cornice_protrusion])])
        }
    };
    Ok(Mesh::from_part(kind.as_str(), Some(kind), b.v, b.t))
}
