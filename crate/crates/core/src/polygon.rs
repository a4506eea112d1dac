//! Planar polygon algorithms: orientation, simplicity, clipping,
//! triangulation and intersection area.
//!
//! Rings are slices of points. Functions accept rings in either open form
//! (no repeated closing vertex) or closed form unless stated otherwise;
//! [`open_ring`] strips the closing vertex.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }
}

/// Twice the signed area of triangle (a, b, c); positive when counter-clockwise.
#[inline]
pub fn orient<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    b.sub(a).cross(c.sub(a))
}

pub fn is_closed<T: Scalar>(ring: &[Point2<T>]) -> bool {
    ring.len() >= 2 && ring[0] == ring[ring.len() - 1]
}

/// Drops the repeated closing vertex, if present.
pub fn open_ring<T: Scalar>(ring: &[Point2<T>]) -> &[Point2<T>] {
    if is_closed(ring) {
        &ring[..ring.len() - 1]
    } else {
        ring
    }
}

/// Returns a copy ending with the first vertex.
pub fn close_ring<T: Scalar>(ring: &[Point2<T>]) -> Vec<Point2<T>> {
    let mut out = ring.to_vec();
    if !ring.is_empty() && !is_closed(ring) {
        out.push(ring[0]);
    }
    out
}

/// Shoelace signed area; positive for counter-clockwise rings (y up).
pub fn signed_area<T: Scalar>(ring: &[Point2<T>]) -> T {
    let r = open_ring(ring);
    if r.len() < 3 {
        return T::zero();
    }
    let mut s = T::zero();
    for i in 0..r.len() {
        let j = (i + 1) % r.len();
        s = s + r[i].cross(r[j]);
    }
    s * T::lit(0.5)
}

pub fn distinct_vertex_count<T: Scalar>(ring: &[Point2<T>]) -> usize {
    let r = open_ring(ring);
    let mut seen: Vec<Point2<T>> = Vec::with_capacity(r.len());
    for p in r {
        if !seen.contains(p) {
            seen.push(*p);
        }
    }
    seen.len()
}

fn on_segment<T: Scalar>(a: Point2<T>, b: Point2<T>, p: Point2<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// True when closed segments `p1p2` and `q1q2` share at least one point.
pub fn segments_intersect<T: Scalar>(p1: Point2<T>, p2: Point2<T>, q1: Point2<T>, q2: Point2<T>) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    (d1 == z && on_segment(q1, q2, p1))
        || (d2 == z && on_segment(q1, q2, p2))
        || (d3 == z && on_segment(p1, p2, q1))
        || (d4 == z && on_segment(p1, p2, q2))
}

/// Why a ring failed the simplicity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingDefect {
    TooFewVertices(usize),
    RepeatedVertex(usize),
    SelfIntersection(usize, usize),
    ZeroArea,
}

impl std::fmt::Display for RingDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RingDefect::TooFewVertices(n) => write!(f, "ring has {n} distinct vertices, need at least 3"),
            RingDefect::RepeatedVertex(i) => write!(f, "vertex {i} repeats an earlier vertex"),
            RingDefect::SelfIntersection(a, b) => write!(f, "edges {a} and {b} intersect"),
            RingDefect::ZeroArea => write!(f, "ring has zero area"),
        }
    }
}

/// O(n^2) simplicity check. Touching at a single vertex counts as a defect.
pub fn check_simple_ring<T: Scalar>(ring: &[Point2<T>]) -> Result<(), RingDefect> {
    let r = open_ring(ring);
    let n = r.len();
    let distinct = distinct_vertex_count(r);
    if distinct < 3 {
        return Err(RingDefect::TooFewVertices(distinct));
    }
    for i in 0..n {
        if r[..i].contains(&r[i]) {
            return Err(RingDefect::RepeatedVertex(i));
        }
    }
    for i in 0..n {
        let (a1, a2) = (r[i], r[(i + 1) % n]);
        for j in (i + 1)..n {
            let (b1, b2) = (r[j], r[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // neighbours share one vertex; they must not fold back onto each other
                let shared = if j == i + 1 { a2 } else { a1 };
                let (a_other, b_other) = if j == i + 1 { (a1, b2) } else { (a2, b1) };
                if orient(a_other, shared, b_other) == T::zero()
                    && a_other.sub(shared).dot(b_other.sub(shared)) > T::zero()
                {
                    return Err(RingDefect::SelfIntersection(i, j));
                }
                continue;
            }
            if segments_intersect(a1, a2, b1, b2) {
                return Err(RingDefect::SelfIntersection(i, j));
            }
        }
    }
    if signed_area(r) == T::zero() {
        return Err(RingDefect::ZeroArea);
    }
    Ok(())
}

/// Axis-aligned clip rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub min: Point2<T>,
    pub max: Point2<T>,
}

impl<T: Scalar> Rect<T> {
    pub fn new(min_x: T, min_y: T, max_x: T, max_y: T) -> Self {
        Self {
            min: Point2::new(min_x, min_y),
            max: Point2::new(max_x, max_y),
        }
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn intersects(&self, o: &Rect<T>) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn bounding<'a, I: IntoIterator<Item = &'a Point2<T>>>(pts: I) -> Option<Self> {
        let mut it = pts.into_iter();
        let f = *it.next()?;
        let mut r = Rect { min: f, max: f };
        for p in it {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }
}

#[derive(Clone, Copy)]
enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    fn inside<T: Scalar>(self, r: &Rect<T>, p: Point2<T>) -> bool {
        match self {
            Edge::Left => p.x >= r.min.x,
            Edge::Right => p.x <= r.max.x,
            Edge::Bottom => p.y >= r.min.y,
            Edge::Top => p.y <= r.max.y,
        }
    }

    fn intersect<T: Scalar>(self, r: &Rect<T>, a: Point2<T>, b: Point2<T>) -> Point2<T> {
        match self {
            Edge::Left | Edge::Right => {
                let x = if matches!(self, Edge::Left) { r.min.x } else { r.max.x };
                let t = (x - a.x) / (b.x - a.x);
                Point2::new(x, a.y + t * (b.y - a.y))
            }
            Edge::Bottom | Edge::Top => {
                let y = if matches!(self, Edge::Bottom) { r.min.y } else { r.max.y };
                let t = (y - a.y) / (b.y - a.y);
                Point2::new(a.x + t * (b.x - a.x), y)
            }
        }
    }
}

/// Sutherland–Hodgman clip of a ring against a rectangle.
///
/// Returns the clipped ring in open form (possibly with fewer than 3
/// vertices when the ring lies outside the rectangle).
pub fn clip_ring_to_rect<T: Scalar>(ring: &[Point2<T>], rect: &Rect<T>) -> Vec<Point2<T>> {
    let mut output: Vec<Point2<T>> = open_ring(ring).to_vec();
    for edge in [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top] {
        if output.is_empty() {
            break;
        }
        let input = std::mem::take(&mut output);
        let mut prev = *input.last().expect("non-empty");
        for &cur in &input {
            let cur_in = edge.inside(rect, cur);
            let prev_in = edge.inside(rect, prev);
            if cur_in {
                if !prev_in {
                    output.push(edge.intersect(rect, prev, cur));
                }
                output.push(cur);
            } else if prev_in {
                output.push(edge.intersect(rect, prev, cur));
            }
            prev = cur;
        }
    }
    output.dedup();
    while output.len() > 1 && output.first() == output.last() {
        output.pop();
    }
    output
}

/// Liang–Barsky clip of one segment; `None` when it misses the rectangle.
fn clip_segment<T: Scalar>(a: Point2<T>, b: Point2<T>, rect: &Rect<T>) -> Option<(Point2<T>, Point2<T>)> {
    let d = b.sub(a);
    let mut t0 = T::zero();
    let mut t1 = T::one();
    let checks = [
        (-d.x, a.x - rect.min.x),
        (d.x, rect.max.x - a.x),
        (-d.y, a.y - rect.min.y),
        (d.y, rect.max.y - a.y),
    ];
    for (p, q) in checks {
        if p == T::zero() {
            if q < T::zero() {
                return None;
            }
        } else {
            let r = q / p;
            if p < T::zero() {
                if r > t1 {
                    return None;
                }
                t0 = t0.max(r);
            } else {
                if r < t0 {
                    return None;
                }
                t1 = t1.min(r);
            }
        }
    }
    let pa = if t0 == T::zero() { a } else { a.add(d.scale(t0)) };
    let pb = if t1 == T::one() { b } else { a.add(d.scale(t1)) };
    Some((clamp_to_rect(pa, rect), clamp_to_rect(pb, rect)))
}

fn clamp_to_rect<T: Scalar>(p: Point2<T>, r: &Rect<T>) -> Point2<T> {
    Point2::new(p.x.max(r.min.x).min(r.max.x), p.y.max(r.min.y).min(r.max.y))
}

/// Splits a polyline into the pieces lying inside the rectangle.
pub fn clip_polyline_to_rect<T: Scalar>(line: &[Point2<T>], rect: &Rect<T>) -> Vec<Vec<Point2<T>>> {
    let mut parts: Vec<Vec<Point2<T>>> = Vec::new();
    let mut current: Vec<Point2<T>> = Vec::new();
    for w in line.windows(2) {
        match clip_segment(w[0], w[1], rect) {
            Some((a, b)) => {
                if current.last() != Some(&a) {
                    if current.len() >= 2 {
                        parts.push(std::mem::take(&mut current));
                    }
                    current.clear();
                    current.push(a);
                }
                current.push(b);
                // the segment left the window: end this piece
                if b != w[1] {
                    if current.len() >= 2 {
                        parts.push(std::mem::take(&mut current));
                    }
                    current.clear();
                }
            }
            None => {
                if current.len() >= 2 {
                    parts.push(std::mem::take(&mut current));
                }
                current.clear();
            }
        }
    }
    if current.len() >= 2 {
        parts.push(current);
    }
    parts
}

/// Sutherland–Hodgman clip of `subject` by a convex counter-clockwise polygon.
pub fn clip_by_convex<T: Scalar>(subject: &[Point2<T>], clip: &[Point2<T>]) -> Vec<Point2<T>> {
    let clip = open_ring(clip);
    let mut output = open_ring(subject).to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let (c1, c2) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut output);
        let mut prev = *input.last().expect("non-empty");
        for &cur in &input {
            let cur_in = orient(c1, c2, cur) >= T::zero();
            let prev_in = orient(c1, c2, prev) >= T::zero();
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(prev, cur, c1, c2));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(prev, cur, c1, c2));
            }
            prev = cur;
        }
    }
    output
}

fn line_intersection<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> Point2<T> {
    let r = b.sub(a);
    let s = d.sub(c);
    let denom = r.cross(s);
    if denom == T::zero() {
        return a;
    }
    let t = c.sub(a).cross(s) / denom;
    a.add(r.scale(t))
}

/// Ear-clipping triangulation of a polygon with optional holes.
///
/// `rings[0]` is the exterior, the rest are holes; rings may be open or
/// closed and of either orientation. Vertex indices in the output refer
/// to the concatenation of the open rings in order. Output triangles are
/// counter-clockwise.
pub fn triangulate<T: Scalar>(rings: &[Vec<Point2<T>>]) -> Vec<[usize; 3]> {
    let mut verts: Vec<Point2<T>> = Vec::new();
    let mut ring_idx: Vec<Vec<usize>> = Vec::new();
    for (k, ring) in rings.iter().enumerate() {
        let r = open_ring(ring);
        let start = verts.len();
        verts.extend_from_slice(r);
        let mut idx: Vec<usize> = (start..start + r.len()).collect();
        let ccw = signed_area(r) > T::zero();
        // exterior counter-clockwise, holes clockwise
        if (k == 0) != ccw {
            idx.reverse();
        }
        ring_idx.push(idx);
    }
    if ring_idx.is_empty() || ring_idx[0].len() < 3 {
        return Vec::new();
    }
    let mut outer = ring_idx[0].clone();
    let mut holes: Vec<Vec<usize>> = ring_idx[1..].iter().filter(|h| h.len() >= 3).cloned().collect();
    // bridge holes right-most first
    holes.sort_by(|a, b| {
        let ma = a.iter().map(|&i| verts[i].x).fold(T::neg_infinity(), T::max);
        let mb = b.iter().map(|&i| verts[i].x).fold(T::neg_infinity(), T::max);
        mb.partial_cmp(&ma).unwrap_or(std::cmp::Ordering::Equal)
    });
    for hole in holes {
        outer = bridge_hole(&verts, outer, &hole);
    }
    ear_clip(&verts, outer)
}

fn bridge_hole<T: Scalar>(verts: &[Point2<T>], outer: Vec<usize>, hole: &[usize]) -> Vec<usize> {
    // hole vertex with maximum x
    let (hm, _) = hole
        .iter()
        .enumerate()
        .fold((0usize, T::neg_infinity()), |acc, (k, &i)| {
            if verts[i].x > acc.1 {
                (k, verts[i].x)
            } else {
                acc
            }
        });
    let m = verts[hole[hm]];
    // nearest outer edge hit by a ray toward +x
    let n = outer.len();
    let mut best: Option<(T, usize)> = None;
    for k in 0..n {
        let a = verts[outer[k]];
        let b = verts[outer[(k + 1) % n]];
        if (a.y > m.y) == (b.y > m.y) && !(a.y == m.y || b.y == m.y) {
            continue;
        }
        if a.y == b.y {
            if a.y == m.y {
                for (kk, p) in [(k, a), ((k + 1) % n, b)] {
                    if p.x >= m.x && best.is_none_or(|(bx, _)| p.x - m.x < bx) {
                        best = Some((p.x - m.x, kk));
                    }
                }
            }
            continue;
        }
        let t = (m.y - a.y) / (b.y - a.y);
        if t < T::zero() || t > T::one() {
            continue;
        }
        let x = a.x + t * (b.x - a.x);
        if x < m.x {
            continue;
        }
        let dist = x - m.x;
        // visible candidate: the edge endpoint with the larger x
        let cand = if a.x > b.x { k } else { (k + 1) % n };
        if best.is_none_or(|(bx, _)| dist < bx) {
            best = Some((dist, cand));
        }
    }
    let mut p_k = match best {
        Some((_, k)) => k,
        None => {
            // degenerate input; fall back to the nearest outer vertex
            (0..n)
                .min_by(|&i, &j| {
                    let di = verts[outer[i]].sub(m).norm();
                    let dj = verts[outer[j]].sub(m).norm();
                    di.partial_cmp(&dj).unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(0)
        }
    };
    if let Some((dist, _)) = best {
        let hit = Point2::new(m.x + dist, m.y);
        let p = verts[outer[p_k]];
        // reflex outer vertices inside triangle (m, hit, p) may block the bridge
        let mut best_angle: Option<(T, T)> = None;
        for k in 0..n {
            let v = verts[outer[k]];
            if v == p {
                continue;
            }
            let prev = verts[outer[(k + n - 1) % n]];
            let next = verts[outer[(k + 1) % n]];
            let reflex = orient(prev, v, next) <= T::zero();
            if !reflex || !point_in_triangle(v, m, hit, p) {
                continue;
            }
            let d = v.sub(m);
            let angle = d.y.abs().atan2(d.x);
            let len = d.norm();
            if best_angle.is_none_or(|(ba, bl)| angle < ba || (angle == ba && len < bl)) {
                best_angle = Some((angle, len));
                p_k = k;
            }
        }
    }
    let mut out = Vec::with_capacity(outer.len() + hole.len() + 2);
    out.extend_from_slice(&outer[..=p_k]);
    for j in 0..=hole.len() {
        out.push(hole[(hm + j) % hole.len()]);
    }
    out.push(outer[p_k]);
    out.extend_from_slice(&outer[p_k + 1..]);
    out
}

fn point_in_triangle<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>, c: Point2<T>) -> bool {
    let d1 = orient(a, b, p);
    let d2 = orient(b, c, p);
    let d3 = orient(c, a, p);
    let z = T::zero();
    let has_neg = d1 < z || d2 < z || d3 < z;
    let has_pos = d1 > z || d2 > z || d3 > z;
    !(has_neg && has_pos)
}

fn ear_clip<T: Scalar>(verts: &[Point2<T>], mut poly: Vec<usize>) -> Vec<[usize; 3]> {
    let mut tris = Vec::with_capacity(poly.len().saturating_sub(2));
    let mut guard = 0usize;
    while poly.len() > 3 {
        let n = poly.len();
        let mut ear = None;
        for i in 0..n {
            let (ip, inx) = ((i + n - 1) % n, (i + 1) % n);
            let (a, b, c) = (verts[poly[ip]], verts[poly[i]], verts[poly[inx]]);
            if orient(a, b, c) <= T::zero() {
                continue;
            }
            let blocked = poly.iter().enumerate().any(|(k, &vi)| {
                if k == ip || k == i || k == inx {
                    return false;
                }
                let p = verts[vi];
                if p == a || p == b || p == c {
                    return false;
                }
                point_in_triangle(p, a, b, c)
            });
            if !blocked {
                ear = Some(i);
                break;
            }
        }
        // no strict ear: clip a degenerate (collinear) vertex, else the most convex one
        let i = ear.unwrap_or_else(|| {
            (0..n)
                .max_by(|&i, &j| {
                    let oi = orient(verts[poly[(i + n - 1) % n]], verts[poly[i]], verts[poly[(i + 1) % n]]);
                    let oj = orient(verts[poly[(j + n - 1) % n]], verts[poly[j]], verts[poly[(j + 1) % n]]);
                    let key = |o: T| if o == T::zero() { T::infinity() } else { o };
                    key(oi).partial_cmp(&key(oj)).unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(0)
        });
        tris.push([poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]]);
        poly.remove(i);
        guard += 1;
        if guard > 1_000_000 {
            break;
        }
    }
    if poly.len() == 3 {
        tris.push([poly[0], poly[1], poly[2]]);
    }
    tris
}

/// Area of the intersection of two polygons (each given as exterior plus
/// optional holes), computed by clipping every triangle of one
/// triangulation against every triangle of the other.
pub fn intersection_area<T: Scalar>(a: &[Vec<Point2<T>>], b: &[Vec<Point2<T>>]) -> T {
    let flat = |rings: &[Vec<Point2<T>>]| -> Vec<Point2<T>> {
        rings.iter().flat_map(|r| open_ring(r).iter().copied()).collect()
    };
    let (va, vb) = (flat(a), flat(b));
    let ta = triangulate(a);
    let tb = triangulate(b);
    let boxes_b: Vec<(Rect<T>, [Point2<T>; 3])> = tb
        .iter()
        .map(|t| {
            let tri = [vb[t[0]], vb[t[1]], vb[t[2]]];
            (Rect::bounding(tri.iter()).expect("triangle"), tri)
        })
        .collect();
    let mut total = T::zero();
    for t in &ta {
        let tri = [va[t[0]], va[t[1]], va[t[2]]];
        if orient(tri[0], tri[1], tri[2]) <= T::zero() {
            continue;
        }
        let bb = Rect::bounding(tri.iter()).expect("triangle");
        for (bbox, other) in &boxes_b {
            if !bb.intersects(bbox) || orient(other[0], other[1], other[2]) <= T::zero() {
                continue;
            }
            let clipped = clip_by_convex(&tri, other);
            total = total + signed_area(&clipped).max(T::zero());
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn tri_area(v: &[Point2<f64>], tris: &[[usize; 3]]) -> f64 {
        tris.iter().map(|t| orient(v[t[0]], v[t[1]], v[t[2]]) * 0.5).sum()
    }

    #[test]
    fn square_area_and_orientation() {
        let sq = vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(0.0, 0.0)];
        assert_eq!(signed_area(&sq), 1.0);
        let cw: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(signed_area(&cw), -1.0);
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bow = vec![p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)];
        assert!(matches!(check_simple_ring(&bow), Err(RingDefect::SelfIntersection(..))));
    }

    #[test]
    fn vertex_touch_is_rejected() {
        // figure-eight touching at (1,1)
        let ring = vec![p(0.0, 0.0), p(1.0, 1.0), p(2.0, 0.0), p(2.0, 2.0), p(1.0, 1.0), p(0.0, 2.0)];
        assert!(check_simple_ring(&ring).is_err());
    }

    #[test]
    fn two_points_is_not_a_polygon() {
        assert_eq!(
            check_simple_ring(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 0.0)]),
            Err(RingDefect::TooFewVertices(2))
        );
    }

    #[test]
    fn spike_is_rejected() {
        let ring = vec![p(0.0, 0.0), p(2.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)];
        assert!(check_simple_ring(&ring).is_err());
    }

    #[test]
    fn square_straddling_right_edge() {
        let window = Rect::new(-1.0, -1.0, 0.5, 2.0);
        let sq = vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        let out = clip_ring_to_rect(&sq, &window);
        // hand trace: left keeps all; right edge x=0.5 cuts (1,0)->... giving
        // (0,0) (0.5,0) (0.5,1) (0,1)
        assert_eq!(out, vec![p(0.0, 0.0), p(0.5, 0.0), p(0.5, 1.0), p(0.0, 1.0)]);
        assert_eq!(signed_area(&out), 0.5);
    }

    #[test]
    fn clip_inside_and_outside() {
        let window = Rect::new(-10.0, -10.0, 10.0, 10.0);
        let sq = vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert_eq!(clip_ring_to_rect(&sq, &window), sq);
        let far: Vec<_> = sq.iter().map(|q| p(q.x + 100.0, q.y)).collect();
        assert!(clip_ring_to_rect(&far, &window).is_empty());
    }

    #[test]
    fn polyline_is_split() {
        let window = Rect::new(0.0, 0.0, 10.0, 10.0);
        let line = vec![p(-5.0, 5.0), p(5.0, 5.0), p(5.0, 15.0), p(8.0, 15.0), p(8.0, 5.0), p(20.0, 5.0)];
        let parts = clip_polyline_to_rect(&line, &window);
        assert_eq!(
            parts,
            vec![
                vec![p(0.0, 5.0), p(5.0, 5.0), p(5.0, 10.0)],
                vec![p(8.0, 10.0), p(8.0, 5.0), p(10.0, 5.0)],
            ]
        );
    }

    #[test]
    fn triangulates_l_shape() {
        let l = vec![p(0.0, 0.0), p(2.0, 0.0), p(2.0, 1.0), p(1.0, 1.0), p(1.0, 2.0), p(0.0, 2.0)];
        let tris = triangulate(std::slice::from_ref(&l));
        assert_eq!(tris.len(), 4);
        assert!((tri_area(&l, &tris) - 3.0).abs() < 1e-12);
        for t in &tris {
            assert!(orient(l[t[0]], l[t[1]], l[t[2]]) > 0.0);
        }
    }

    #[test]
    fn triangulates_square_with_hole() {
        let outer = vec![p(0.0, 0.0), p(4.0, 0.0), p(4.0, 4.0), p(0.0, 4.0)];
        let hole = vec![p(1.0, 1.0), p(3.0, 1.0), p(3.0, 3.0), p(1.0, 3.0)];
        let tris = triangulate(&[outer.clone(), hole.clone()]);
        let v: Vec<_> = outer.iter().chain(hole.iter()).copied().collect();
        assert!((tri_area(&v, &tris) - 12.0).abs() < 1e-12);
        assert_eq!(tris.len(), 8);
    }

    #[test]
    fn intersection_of_offset_rectangles() {
        let a = vec![vec![p(0.0, 0.0), p(4.0, 0.0), p(4.0, 3.0), p(0.0, 3.0)]];
        let b = vec![vec![p(2.0, 1.0), p(6.0, 1.0), p(6.0, 5.0), p(2.0, 5.0)]];
        // overlap is [2,4] x [1,3]
        assert!((intersection_area(&a, &b) - 4.0).abs() < 1e-12);
        let c = vec![vec![p(10.0, 10.0), p(11.0, 10.0), p(11.0, 11.0)]];
        assert_eq!(intersection_area(&a, &c), 0.0);
    }
}
