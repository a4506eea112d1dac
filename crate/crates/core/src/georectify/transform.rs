use serde::{Deserialize, Serialize};

use super::GeorectifyError;
use crate::geo::MercatorPoint;
use crate::polygon::Point2;
use crate::scalar::Scalar;

/// Transform family. `Affine` is the degree-1 polynomial under another name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Affine,
    Polynomial,
}

impl std::fmt::Display for TransformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransformKind::Affine => f.write_str("affine"),
            TransformKind::Polynomial => f.write_str("polynomial"),
        }
    }
}

/// Parses a transform name: `affine`, or `poly1` to `poly3` (`polynomial`
/// is accepted in place of `poly`). Returns the family and degree.
pub fn parse_transform_kind(s: &str) -> Result<(TransformKind, u8), GeorectifyError> {
    let s = s.trim().to_ascii_lowercase();
    if s == "affine" {
        return Ok((TransformKind::Affine, 1));
    }
    let digits = s.strip_prefix("polynomial").or_else(|| s.strip_prefix("poly"));
    match digits.and_then(|d| d.parse::<u8>().ok()) {
        Some(d @ 1..=3) => Ok((TransformKind::Polynomial, d)),
        _ => Err(GeorectifyError::InvalidTransform(format!(
            "unknown transform {s:?}; expected affine, poly1, poly2 or poly3"
        ))),
    }
}

/// Number of monomials of total degree at most `degree`: (d+1)(d+2)/2.
pub fn monomial_count(degree: u8) -> usize {
    let d = degree as usize;
    (d + 1) * (d + 2) / 2
}

/// Exponent pairs `(i, j)` of `u^i v^j`, ordered by total degree and then
/// by decreasing power of `u`: `1, u, v, u², uv, v², u³, u²v, uv², v³`.
pub fn monomial_exponents(degree: u8) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(monomial_count(degree));
    for total in 0..=degree as u32 {
        for j in 0..=total {
            out.push((total - j, j));
        }
    }
    out
}

/// Planar polynomial mapping `(u, v) -> (x, y)`.
///
/// Coefficients follow [`monomial_exponents`] order, so an affine map
/// `x = a u + b v + c` has `coeffs_x = [c, a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transform2D<T> {
    pub kind: TransformKind,
    pub degree: u8,
    pub coeffs_x: Vec<T>,
    pub coeffs_y: Vec<T>,
}

impl<T: Scalar> Transform2D<T> {
    pub fn new(kind: TransformKind, degree: u8, coeffs_x: Vec<T>, coeffs_y: Vec<T>) -> Result<Self, GeorectifyError> {
        let t = Self {
            kind,
            degree,
            coeffs_x,
            coeffs_y,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn identity() -> Self {
        Self::affine([T::one(), T::zero(), T::zero()], [T::zero(), T::one(), T::zero()])
    }

    /// Affine map from matrix rows `[a, b, c]`, `[d, e, f]`:
    /// `x = a u + b v + c`, `y = d u + e v + f`.
    pub fn affine(row_x: [T; 3], row_y: [T; 3]) -> Self {
        Self {
            kind: TransformKind::Affine,
            degree: 1,
            coeffs_x: vec![row_x[2], row_x[0], row_x[1]],
            coeffs_y: vec![row_y[2], row_y[0], row_y[1]],
        }
    }

    pub fn validate(&self) -> Result<(), GeorectifyError> {
        if !(1..=3).contains(&self.degree) {
            return Err(GeorectifyError::InvalidTransform(format!(
                "degree {} outside 1..=3",
                self.degree
            )));
        }
        if self.kind == TransformKind::Affine && self.degree != 1 {
            return Err(GeorectifyError::InvalidTransform("affine transform must have degree 1".into()));
        }
        let m = monomial_count(self.degree);
        if self.coeffs_x.len() != m || self.coeffs_y.len() != m {
            return Err(GeorectifyError::InvalidTransform(format!(
                "degree {} needs {m} coefficients per axis, got {} and {}",
                self.degree,
                self.coeffs_x.len(),
                self.coeffs_y.len()
            )));
        }
        if !self.coeffs_x.iter().chain(&self.coeffs_y).all(|c| c.is_finite()) {
            return Err(GeorectifyError::InvalidTransform("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Evaluates the polynomial at `(u, v)`.
    pub fn eval(&self, u: T, v: T) -> (T, T) {
        let mut x = T::zero();
        let mut y = T::zero();
        for (k, (i, j)) in monomial_exponents(self.degree).into_iter().enumerate() {
            let m = u.powi(i as i32) * v.powi(j as i32);
            x = x + self.coeffs_x[k] * m;
            y = y + self.coeffs_y[k] * m;
        }
        (x, y)
    }

    pub fn apply(&self, p: Point2<T>) -> MercatorPoint<T> {
        let (x, y) = self.eval(p.x, p.y);
        MercatorPoint::new(x, y)
    }

    /// Exact inverse of a degree-1 map. Higher degrees have no closed-form
    /// inverse; fit one from the control points instead.
    pub fn affine_inverse(&self) -> Result<Self, GeorectifyError> {
        self.validate()?;
        if self.degree != 1 {
            return Err(GeorectifyError::InvalidTransform(format!(
                "degree-{} transform has no closed-form inverse",
                self.degree
            )));
        }
        let [c, a, b] = [self.coeffs_x[0], self.coeffs_x[1], self.coeffs_x[2]];
        let [f, d, e] = [self.coeffs_y[0], self.coeffs_y[1], self.coeffs_y[2]];
        let det = a * e - b * d;
        let scale = (a.abs() + b.abs()) * (d.abs() + e.abs());
        if !(det.abs() > T::lit(1e-14) * scale) {
            return Err(GeorectifyError::Degenerate("affine transform is singular".into()));
        }
        let inv = Self {
            kind: self.kind,
            degree: 1,
            coeffs_x: vec![(b * f - e * c) / det, e / det, -b / det],
            coeffs_y: vec![(d * c - a * f) / det, -d / det, a / det],
        };
        inv.validate()?;
        Ok(inv)
    }
}
