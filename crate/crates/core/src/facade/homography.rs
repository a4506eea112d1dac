//! Rectifying homographies.

use super::vanishing::VanishingPoint;
use super::{FacadeBox, FacadeError};
use crate::linalg::{mat3_det, mat3_identity, mat3_inverse, mat3_mul, mat3_vec, Mat3};
use crate::polygon::Point2;
use crate::scalar::Scalar;

/// Projective 3x3 map on homogeneous image points, scaled so `m[2][2] == 1`
/// whenever that entry is non-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography<T> {
    pub m: Mat3<T>,
}

impl<T: Scalar> Homography<T> {
    pub fn identity() -> Self {
        Self { m: mat3_identity() }
    }

    /// Normalizes and checks invertibility (|det| above 1e-12 of the
    /// entry scale cubed).
    pub fn new(mut m: Mat3<T>) -> Result<Self, FacadeError> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(FacadeError::Degenerate("homography has non-finite entries".into()));
        }
        let s = m[2][2];
        if s.abs() > T::lit(1e-300) {
            for row in &mut m {
                for v in row {
                    *v = *v / s;
                }
            }
        }
        let scale = m.iter().flatten().fold(T::zero(), |a, v| a.max(v.abs()));
        let det = mat3_det(&m);
        if !(det.abs() > T::lit(1e-12) * scale * scale * scale) {
            return Err(FacadeError::Degenerate("homography is singular".into()));
        }
        Ok(Self { m })
    }

    pub fn inverse(&self) -> Result<Self, FacadeError> {
        let inv = mat3_inverse(&self.m).ok_or_else(|| FacadeError::Degenerate("homography is singular".into()))?;
        Self::new(inv)
    }

    pub fn then(&self, next: &Homography<T>) -> Result<Self, FacadeError> {
        Self::new(mat3_mul(&next.m, &self.m))
    }

    pub fn apply_h(&self, v: [T; 3]) -> [T; 3] {
        mat3_vec(&self.m, &v)
    }

    /// Maps a Euclidean point; `None` when it lands at infinity.
    pub fn apply(&self, p: Point2<T>) -> Option<Point2<T>> {
        let [x, y, w] = self.apply_h([p.x, p.y, T::one()]);
        let mag = self.m[2][0].abs() * p.x.abs() + self.m[2][1].abs() * p.y.abs() + self.m[2][2].abs();
        if !(w.abs() > T::lit(1e-12) * mag) {
            return None;
        }
        Some(Point2::new(x / w, y / w))
    }
}

/// Homography sending `vp_h` to the x direction at infinity and `vp_v` to
/// the y direction, with the image center fixed. Scale is set so a unit
/// step from the center toward each vanishing point maps to a unit step.
pub fn rectifying_homography<T: Scalar>(
    vp_h: &VanishingPoint<T>,
    vp_v: &VanishingPoint<T>,
    width: T,
    height: T,
) -> Result<Homography<T>, FacadeError> {
    if !(width > T::zero() && height > T::zero()) {
        return Err(FacadeError::Domain("image size must be positive".into()));
    }
    let half = T::lit(0.5);
    let c = Point2::new(width * half, height * half);
    let (h, v) = (vp_h.0, vp_v.0);
    let m: Mat3<T> = [[h[0], v[0], c.x], [h[1], v[1], c.y], [h[2], v[2], T::one()]];
    // columns are unit-ish, so the raw determinant is a fair conditioning test
    let det = mat3_det(&m);
    let col_scale = (c.x * c.x + c.y * c.y + T::one()).sqrt();
    if !(det.abs() > T::lit(1e-12) * col_scale) {
        return Err(FacadeError::Degenerate(
            "vanishing points coincide or are collinear with the image center".into(),
        ));
    }
    let g = mat3_inverse(&m).expect("non-zero determinant");
    // G maps the center to the origin with w = 1, so its Jacobian there is
    // the upper-left 2x2 block
    let mut dh = vp_h.direction_from(c);
    if dh.x < T::zero() {
        dh = dh.scale(-T::one());
    }
    let mut dv = vp_v.direction_from(c);
    if dv.y < T::zero() {
        dv = dv.scale(-T::one());
    }
    let sx = g[0][0] * dh.x + g[0][1] * dh.y;
    let sy = g[1][0] * dv.x + g[1][1] * dv.y;
    if !(sx.abs() > T::zero() && sy.abs() > T::zero()) {
        return Err(FacadeError::Degenerate("vanishing direction passes through the center".into()));
    }
    let a: Mat3<T> = [
        [T::one() / sx, T::zero(), c.x],
        [T::zero(), T::one() / sy, c.y],
        [T::zero(), T::zero(), T::one()],
    ];
    Homography::new(mat3_mul(&a, &g))
}

/// Maps each box's corners and re-boxes them as an axis-aligned rectangle.
pub fn apply_homography<T: Scalar>(h: &Homography<T>, boxes: &[FacadeBox<T>]) -> Result<Vec<FacadeBox<T>>, FacadeError> {
    boxes
        .iter()
        .enumerate()
        .map(|(index, b)| {
            let corners = b.corners();
            let w_sign = |p: &Point2<T>| h.apply_h([p.x, p.y, T::one()])[2] > T::zero();
            let first = w_sign(&corners[0]);
            let mut mapped = Vec::with_capacity(4);
            for p in &corners {
                // a box straddling the horizon line has no finite image
                match h.apply(*p) {
                    Some(q) if w_sign(p) == first => mapped.push(q),
                    _ => return Err(FacadeError::Projection { index, label: b.label }),
                }
            }
            let r = crate::polygon::Rect::bounding(mapped.iter()).expect("four corners");
            Ok(FacadeBox {
                label: b.label,
                x: r.min.x,
                y: r.min.y,
                w: r.max.x - r.min.x,
                h: r.max.y - r.min.y,
                confidence: b.confidence,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facade::FacadeLabel;

    #[test]
    fn axis_vps_give_identity() {
        let vh = VanishingPoint::new([1.0, 0.0, 0.0]).unwrap();
        let vv = VanishingPoint::new([0.0, 1.0, 0.0]).unwrap();
        let h = rectifying_homography(&vh, &vv, 640.0, 480.0).unwrap();
        for (r, row) in h.m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let e: f64 = if r == c { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-12, "{:?}", h.m);
            }
        }
    }

    #[test]
    fn coincident_vps_rejected() {
        let v = VanishingPoint::new([1.0, 0.0, 0.0]).unwrap();
        assert!(rectifying_homography(&v, &v, 100.0, 100.0).is_err());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let h = Homography::new([[1.1, 0.2, 5.0], [0.05, 0.9, -3.0], [1e-4, 2e-4, 1.0]]).unwrap();
        let id = h.then(&h.inverse().unwrap()).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let e: f64 = if r == c { 1.0 } else { 0.0 };
                assert!((id.m[r][c] - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn boxes_under_identity_and_scale() {
        let b = vec![FacadeBox::new(FacadeLabel::Window, 10.0, 20.0, 5.0, 8.0)];
        assert_eq!(apply_homography(&Homography::identity(), &b).unwrap(), b);
        let s = Homography::new([[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let out = apply_homography(&s, &b).unwrap();
        assert_eq!((out[0].w, out[0].h), (10.0, 16.0));
    }

    #[test]
    fn box_across_horizon_fails() {
        // w = 1 - x/100 vanishes at x = 100
        let h = Homography::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-0.01, 0.0, 1.0]]).unwrap();
        let b = vec![FacadeBox::new(FacadeLabel::Entry, 90.0, 0.0, 20.0, 10.0)];
        assert!(matches!(apply_homography(&h, &b), Err(FacadeError::Projection { index: 0, .. })));
    }
}
