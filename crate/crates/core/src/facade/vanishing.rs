//! Robust vanishing-point estimation from line segments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FacadeError;
use crate::linalg::{cross3, norm3, SquareMatrix, Vec3};
use crate::polygon::Point2;
use crate::scalar::Scalar;

pub const RANSAC_ITERATIONS: usize = 500;
pub const RANSAC_SEED: u64 = 0x7a11_ade5;
/// Inlier threshold: angle between a segment and the ray from its midpoint
/// to the candidate point.
pub const RANSAC_THRESHOLD_DEG: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSegment<T> {
    pub p1: Point2<T>,
    pub p2: Point2<T>,
}

impl<T: Scalar> LineSegment<T> {
    pub fn new(x1: T, y1: T, x2: T, y2: T) -> Result<Self, FacadeError> {
        let s = Self {
            p1: Point2::new(x1, y1),
            p2: Point2::new(x2, y2),
        };
        if !(s.length() > T::zero()) {
            return Err(FacadeError::Domain("line segment has zero length".into()));
        }
        Ok(s)
    }

    pub fn length(&self) -> T {
        self.p2.sub(self.p1).norm()
    }

    pub fn midpoint(&self) -> Point2<T> {
        self.p1.add(self.p2).scale(T::lit(0.5))
    }

    /// Direction angle folded into (-90°, 90°].
    pub fn angle_deg(&self) -> T {
        let d = self.p2.sub(self.p1);
        let mut a = d.y.atan2(d.x).to_degrees();
        let half = T::lit(90.0);
        if a > half {
            a = a - T::lit(180.0);
        } else if a <= -half {
            a = a + T::lit(180.0);
        }
        a
    }

    pub fn is_horizontal(&self) -> bool {
        self.angle_deg().abs() < T::lit(45.0)
    }
}

/// Homogeneous point, unit length. `c == 0` is a direction at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanishingPoint<T>(pub Vec3<T>);

impl<T: Scalar> VanishingPoint<T> {
    /// Normalizes to unit length with a canonical sign: `c > 0` for finite
    /// points, otherwise the first non-zero of `a`, `b` positive.
    pub fn new(v: Vec3<T>) -> Option<Self> {
        let n = norm3(&v);
        if !(n > T::zero()) || !n.is_finite() {
            return None;
        }
        let mut u = [v[0] / n, v[1] / n, v[2] / n];
        let tiny = T::lit(1e-15);
        let pivot = if u[2].abs() > tiny {
            u[2]
        } else if u[0].abs() > tiny {
            u[0]
        } else {
            u[1]
        };
        if pivot < T::zero() {
            u = [-u[0], -u[1], -u[2]];
        }
        Some(Self(u))
    }

    pub fn at_infinity(&self, tol: T) -> bool {
        self.0[2].abs() < tol
    }

    /// Euclidean point, `None` for directions at infinity.
    pub fn to_point(&self) -> Option<Point2<T>> {
        if self.0[2] == T::zero() {
            return None;
        }
        Some(Point2::new(self.0[0] / self.0[2], self.0[1] / self.0[2]))
    }

    /// Unit image direction from `from` toward this point.
    pub fn direction_from(&self, from: Point2<T>) -> Point2<T> {
        let [a, b, c] = self.0;
        let d = Point2::new(a - from.x * c, b - from.y * c);
        let n = d.norm();
        if n > T::zero() {
            d.scale(T::one() / n)
        } else {
            d
        }
    }
}

struct Normalized<T> {
    lines: Vec<Vec3<T>>,
    segs: Vec<LineSegment<T>>,
    weights: Vec<T>,
}

/// Angular residual (sine) of segment `s` against candidate `v`, both in
/// normalized coordinates.
fn residual_sin<T: Scalar>(s: &LineSegment<T>, v: &Vec3<T>) -> T {
    let d = s.p2.sub(s.p1);
    let m = s.midpoint();
    let to_v = Point2::new(v[0] - m.x * v[2], v[1] - m.y * v[2]);
    let denom = d.norm() * to_v.norm();
    if !(denom > T::zero()) {
        return T::zero();
    }
    (d.cross(to_v) / denom).abs()
}

fn consensus<T: Scalar>(norm: &Normalized<T>, v: &Vec3<T>, sin_thr: T) -> (usize, T) {
    let mut count = 0;
    let mut err = T::zero();
    for s in &norm.segs {
        let r = residual_sin(s, v);
        if r <= sin_thr {
            count += 1;
            err = err + r;
        }
    }
    (count, err)
}

fn estimate_class<T: Scalar>(segs: &[LineSegment<T>], class: &'static str) -> Result<VanishingPoint<T>, FacadeError> {
    if segs.len() < 2 {
        return Err(FacadeError::InsufficientData { class, got: segs.len() });
    }
    // shift to the centroid and scale to unit RMS radius for conditioning
    let n = T::from_count(segs.len() * 2);
    let mut c = Point2::new(T::zero(), T::zero());
    for s in segs {
        c = c.add(s.p1).add(s.p2);
    }
    c = c.scale(T::one() / n);
    let mut ss = T::zero();
    for s in segs {
        ss = ss + s.p1.sub(c).dot(s.p1.sub(c)) + s.p2.sub(c).dot(s.p2.sub(c));
    }
    let scale = (ss / n).sqrt();
    let scale = if scale > T::zero() { scale } else { T::one() };
    let to_n = |p: Point2<T>| p.sub(c).scale(T::one() / scale);
    let mut norm = Normalized {
        lines: Vec::new(),
        segs: Vec::new(),
        weights: Vec::new(),
    };
    for s in segs {
        let (a, b) = (to_n(s.p1), to_n(s.p2));
        let l = cross3(&[a.x, a.y, T::one()], &[b.x, b.y, T::one()]);
        let ln = (l[0] * l[0] + l[1] * l[1]).sqrt();
        norm.lines.push([l[0] / ln, l[1] / ln, l[2] / ln]);
        norm.segs.push(LineSegment { p1: a, p2: b });
        norm.weights.push(a.sub(b).norm());
    }

    let sin_thr = T::lit(RANSAC_THRESHOLD_DEG).to_radians().sin();
    let k = segs.len();
    let pairs = k * (k - 1) / 2;
    let mut best: Option<(usize, T, Vec3<T>)> = None;
    let consider = |i: usize, j: usize, best: &mut Option<(usize, T, Vec3<T>)>| {
        let v = cross3(&norm.lines[i], &norm.lines[j]);
        if !(norm3(&v) > T::lit(1e-12)) {
            return;
        }
        let (count, err) = consensus(&norm, &v, sin_thr);
        let better = match best {
            None => true,
            Some((bc, be, _)) => count > *bc || (count == *bc && err < *be),
        };
        if better {
            *best = Some((count, err, v));
        }
    };
    if pairs <= RANSAC_ITERATIONS {
        for i in 0..k {
            for j in (i + 1)..k {
                consider(i, j, &mut best);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(RANSAC_SEED);
        for _ in 0..RANSAC_ITERATIONS {
            let i = rng.random_range(0..k);
            let mut j = rng.random_range(0..k - 1);
            if j >= i {
                j += 1;
            }
            consider(i.min(j), i.max(j), &mut best);
        }
    }
    let Some((_, _, candidate)) = best else {
        return Err(FacadeError::Degenerate(format!("all {class} segments lie on one line")));
    };

    // refine: unit v minimizing the weighted sum of (l . v)^2 over inliers
    let mut m = SquareMatrix::<T>::zeros(3);
    let mut inliers = 0;
    for (idx, s) in norm.segs.iter().enumerate() {
        if residual_sin(s, &candidate) <= sin_thr {
            inliers += 1;
            let l = norm.lines[idx];
            let w = norm.weights[idx];
            for r in 0..3 {
                for cc in 0..3 {
                    m[(r, cc)] = m[(r, cc)] + w * l[r] * l[cc];
                }
            }
        }
    }
    let v = if inliers >= 2 {
        let (_, vecs) = m.symmetric_eigen();
        [vecs[0][0], vecs[0][1], vecs[0][2]]
    } else {
        candidate
    };
    // back to pixel coordinates
    let px = [v[0] * scale + c.x * v[2], v[1] * scale + c.y * v[2], v[2]];
    VanishingPoint::new(px).ok_or_else(|| FacadeError::Degenerate(format!("{class} vanishing point undefined")))
}

/// Splits segments at 45° and estimates one vanishing point per class.
/// Returns `(horizontal, vertical)`.
pub fn estimate_vanishing_points<T: Scalar>(
    segments: &[LineSegment<T>],
) -> Result<(VanishingPoint<T>, VanishingPoint<T>), FacadeError> {
    let (h, v): (Vec<LineSegment<T>>, Vec<LineSegment<T>>) = segments.iter().partition(|s| s.is_horizontal());
    Ok((estimate_class(&h, "horizontal")?, estimate_class(&v, "vertical")?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(x1: f64, y1: f64, x2: f64, y2: f64) -> LineSegment<f64> {
        LineSegment::new(x1, y1, x2, y2).unwrap()
    }

    #[test]
    fn concurrent_segments() {
        let vp = (100.0, 50.0);
        let mut h = Vec::new();
        for k in 0..5 {
            let ang = (k as f64 * 7.0 - 14.0).to_radians();
            let (dx, dy) = (ang.cos(), ang.sin());
            h.push(seg(vp.0 - 300.0 * dx, vp.1 - 300.0 * dy, vp.0 - 100.0 * dx, vp.1 - 100.0 * dy));
        }
        let v: Vec<_> = (0..3).map(|k| seg(k as f64 * 10.0, 0.0, k as f64 * 10.0, 100.0)).collect();
        let all: Vec<_> = h.into_iter().chain(v).collect();
        let (vh, vv) = estimate_vanishing_points(&all).unwrap();
        let p = vh.to_point().unwrap();
        assert!((p.x - 100.0).abs() < 1e-6 && (p.y - 50.0).abs() < 1e-6, "{p:?}");
        assert!(vv.at_infinity(1e-9));
        assert!((vv.0[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn parallel_horizontals_at_infinity() {
        let segs = vec![
            seg(0.0, 0.0, 100.0, 0.0),
            seg(10.0, 40.0, 90.0, 40.0),
            seg(-5.0, 90.0, 70.0, 90.0),
            seg(0.0, 0.0, 0.0, 10.0),
            seg(50.0, 0.0, 50.0, 10.0),
        ];
        let (vh, _) = estimate_vanishing_points(&segs).unwrap();
        assert!(vh.0[2].abs() < 1e-9);
        assert!((vh.0[0] - 1.0).abs() < 1e-9 && vh.0[1].abs() < 1e-9);
    }

    #[test]
    fn too_few_segments() {
        let segs = vec![seg(0.0, 0.0, 100.0, 0.0), seg(0.0, 0.0, 0.0, 10.0), seg(5.0, 0.0, 5.0, 10.0)];
        assert!(matches!(
            estimate_vanishing_points(&segs),
            Err(FacadeError::InsufficientData { class: "horizontal", got: 1 })
        ));
        assert!(LineSegment::new(1.0, 1.0, 1.0, 1.0).is_err());
    }
}
