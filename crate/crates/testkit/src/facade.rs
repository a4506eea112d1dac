//! Synthetic facades with known ground truth.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use timeatlas_core::facade::{FacadeBox, FacadeLabel};

/// Regular window grid: `rows x cols` boxes of `w x h` starting at
/// `(x0, y0)` with pitch `(dx, dy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub w: f64,
    pub h: f64,
}

impl GridSpec {
    pub fn boxes(&self) -> Vec<FacadeBox<f64>> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(FacadeBox::new(
                    FacadeLabel::Window,
                    self.x0 + c as f64 * self.dx,
                    self.y0 + r as f64 * self.dy,
                    self.w,
                    self.h,
                ));
            }
        }
        out
    }
}

/// Moves every edge of every box independently by up to `±amount`.
pub fn jitter<R: Rng>(rng: &mut R, boxes: &[FacadeBox<f64>], amount: f64) -> Vec<FacadeBox<f64>> {
    boxes
        .iter()
        .map(|b| {
            let mut j = || rng.random_range(-amount..=amount);
            let (l, t, r, btm) = (b.x + j(), b.y + j(), b.x + b.w + j(), b.y + b.h + j());
            FacadeBox::new(b.label, l, t, r - l, btm - t)
        })
        .collect()
}

/// A frontal facade seen through a known perspective homography.
#[derive(Debug, Clone)]
pub struct SyntheticFacade {
    pub width: f64,
    pub height: f64,
    /// Frontal pixel -> image pixel.
    pub h: Matrix3<f64>,
    pub grid: GridSpec,
    /// Window corners in the frontal frame (tl, tr, br, bl per window).
    pub frontal_corners: Vec<[f64; 2]>,
    /// The same corners in the photo.
    pub image_corners: Vec<[f64; 2]>,
    /// Projected window and facade edges, `[x1, y1, x2, y2]`.
    pub segments: Vec<[f64; 4]>,
    /// Axis-aligned hulls of the projected windows, as a detector would
    /// report them.
    pub boxes: Vec<FacadeBox<f64>>,
}

impl SyntheticFacade {
    pub fn project(&self, p: [f64; 2]) -> [f64; 2] {
        project(&self.h, p)
    }

    /// Image directions (unit, sign-free) toward the true vanishing points
    /// `H (1,0,0)` and `H (0,1,0)`, seen from `from`.
    pub fn true_vp_directions(&self, from: [f64; 2]) -> ([f64; 2], [f64; 2]) {
        let dir = |v: Vector3<f64>| {
            let d = [v[0] - from[0] * v[2], v[1] - from[1] * v[2]];
            let n = d[0].hypot(d[1]);
            [d[0] / n, d[1] / n]
        };
        (dir(self.h * Vector3::x()), dir(self.h * Vector3::y()))
    }
}

pub fn project(h: &Matrix3<f64>, p: [f64; 2]) -> [f64; 2] {
    let v = h * Vector3::new(p[0], p[1], 1.0);
    [v[0] / v[2], v[1] / v[2]]
}

/// Builds a 1000 x 800 px facade with a random window grid and a random
/// mild perspective (yaw/pitch-like projective terms, small shear).
pub fn synthetic_facade<R: Rng>(rng: &mut R) -> SyntheticFacade {
    let (width, height) = (1000.0, 800.0);
    let rows = rng.random_range(2..=4);
    let cols = rng.random_range(3..=6);
    let dx = 800.0 / cols as f64;
    let dy = 600.0 / rows as f64;
    let grid = GridSpec {
        rows,
        cols,
        x0: 100.0 + dx * 0.25,
        y0: 100.0 + dy * 0.2,
        dx,
        dy,
        w: dx * 0.5,
        h: dy * 0.55,
    };
    let (cx, cy) = (width / 2.0, height / 2.0);
    let p = Matrix3::new(
        1.0 + rng.random_range(-0.08..0.08),
        rng.random_range(-0.05..0.05),
        0.0,
        rng.random_range(-0.05..0.05),
        1.0 + rng.random_range(-0.08..0.08),
        0.0,
        rng.random_range(-3e-4..3e-4),
        rng.random_range(-2e-4..2e-4),
        1.0,
    );
    let t = |x: f64, y: f64| Matrix3::new(1.0, 0.0, x, 0.0, 1.0, y, 0.0, 0.0, 1.0);
    let h = t(cx, cy) * p * t(-cx, -cy);

    let mut frontal_corners = Vec::new();
    let mut segments = Vec::new();
    let mut boxes = Vec::new();
    let quad_edges = |q: [[f64; 2]; 4], segments: &mut Vec<[f64; 4]>| {
        let img: Vec<[f64; 2]> = q.iter().map(|&c| project(&h, c)).collect();
        for k in 0..4 {
            let (a, b) = (img[k], img[(k + 1) % 4]);
            segments.push([a[0], a[1], b[0], b[1]]);
        }
        img
    };
    for b in grid.boxes() {
        let q = [[b.x, b.y], [b.x + b.w, b.y], [b.x + b.w, b.y + b.h], [b.x, b.y + b.h]];
        frontal_corners.extend(q);
        let img = quad_edges(q, &mut segments);
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for c in &img {
            for k in 0..2 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        boxes.push(FacadeBox::new(FacadeLabel::Window, lo[0], lo[1], hi[0] - lo[0], hi[1] - lo[1]));
    }
    quad_edges([[50.0, 50.0], [950.0, 50.0], [950.0, 750.0], [50.0, 750.0]], &mut segments);
    let image_corners = frontal_corners.iter().map(|&c| project(&h, c)).collect();
    SyntheticFacade { width, height, h, grid, frontal_corners, image_corners, segments, boxes }
}

/// Largest residual after fitting `dst ≈ s * src + t` independently per
/// axis (least squares). Rectification is only defined up to such a map.
pub fn per_axis_affine_residual(src: &[[f64; 2]], dst: &[[f64; 2]]) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..2 {
        let n = src.len() as f64;
        let (ms, md) = (
            src.iter().map(|p| p[k]).sum::<f64>() / n,
            dst.iter().map(|p| p[k]).sum::<f64>() / n,
        );
        let cov: f64 = src.iter().zip(dst).map(|(a, b)| (a[k] - ms) * (b[k] - md)).sum();
        let var: f64 = src.iter().map(|a| (a[k] - ms).powi(2)).sum();
        let s = cov / var;
        for (a, b) in src.iter().zip(dst) {
            worst = worst.max((s * (a[k] - ms) + md - b[k]).abs());
        }
    }
    worst
}
