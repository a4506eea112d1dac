use serde::{Deserialize, Serialize};

use super::transform::{monomial_count, monomial_exponents, Transform2D, TransformKind};
use super::GeorectifyError;
use crate::geo::{lonlat_to_mercator, GeoPoint};
use crate::linalg::{qr_least_squares, SquareMatrix};
use crate::polygon::Point2;
use crate::scalar::Scalar;

/// Normal matrices with a larger condition number are treated as singular.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

/// A pixel on the scanned map matched to a location on the reference map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPointPair<T> {
    pub source: Point2<T>,
    pub target: GeoPoint<T>,
}

impl<T: Scalar> ControlPointPair<T> {
    pub fn new(px: T, py: T, lon: T, lat: T) -> Self {
        Self {
            source: Point2::new(px, py),
            target: GeoPoint::new(lon, lat),
        }
    }

    fn validate(&self, index: usize) -> Result<(), GeorectifyError> {
        let s = self.source;
        if !s.x.is_finite() || !s.y.is_finite() || s.x < T::zero() || s.y < T::zero() {
            return Err(GeorectifyError::InvalidPair {
                index,
                reason: format!("source pixel ({}, {}) must be finite and non-negative", s.x, s.y),
            });
        }
        self.target.validate().map_err(|e| GeorectifyError::InvalidPair {
            index,
            reason: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub index: usize,
    /// Distance in Mercator meters.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub per_pair: Vec<PairResidual>,
    pub rms: f64,
}

fn projected<T: Scalar>(pairs: &[ControlPointPair<T>]) -> Result<Vec<(Point2<T>, Point2<T>)>, GeorectifyError> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.validate(i)?;
            let m = lonlat_to_mercator(p.target)?;
            Ok((p.source, Point2::new(m.x, m.y)))
        })
        .collect()
}

/// Least-squares fit of pixel -> Mercator meters.
pub fn fit_transform<T: Scalar>(
    pairs: &[ControlPointPair<T>],
    kind: TransformKind,
    degree: u8,
) -> Result<Transform2D<T>, GeorectifyError> {
    check_kind(kind, degree)?;
    let data = projected(pairs)?;
    let (src, dst): (Vec<_>, Vec<_>) = data.into_iter().unzip();
    least_squares(&src, &dst, kind, degree, "source")
}

/// Least-squares fit of Mercator meters -> pixel, used to resample rasters.
pub fn fit_inverse<T: Scalar>(
    pairs: &[ControlPointPair<T>],
    kind: TransformKind,
    degree: u8,
) -> Result<Transform2D<T>, GeorectifyError> {
    check_kind(kind, degree)?;
    let data = projected(pairs)?;
    let (pix, merc): (Vec<_>, Vec<_>) = data.into_iter().unzip();
    least_squares(&merc, &pix, kind, degree, "target")
}

/// Per-pair distances between `t(source)` and the projected target.
pub fn residual_report<T: Scalar>(
    t: &Transform2D<T>,
    pairs: &[ControlPointPair<T>],
) -> Result<ResidualReport, GeorectifyError> {
    t.validate()?;
    if pairs.is_empty() {
        return Err(GeorectifyError::NoPairs);
    }
    let data = projected(pairs)?;
    let per_pair: Vec<PairResidual> = data
        .iter()
        .enumerate()
        .map(|(index, (s, d))| {
            let (x, y) = t.eval(s.x, s.y);
            PairResidual {
                index,
                error: (x - d.x).hypot(y - d.y).as_f64(),
            }
        })
        .collect();
    let mse = per_pair.iter().map(|r| r.error * r.error).sum::<f64>() / per_pair.len() as f64;
    Ok(ResidualReport {
        per_pair,
        rms: mse.sqrt(),
    })
}

fn check_kind(kind: TransformKind, degree: u8) -> Result<(), GeorectifyError> {
    match (kind, degree) {
        (TransformKind::Affine, 1) | (TransformKind::Polynomial, 1..=3) => Ok(()),
        _ => Err(GeorectifyError::InvalidTransform(format!(
            "unsupported {kind} transform of degree {degree}"
        ))),
    }
}

fn kind_label(kind: TransformKind, degree: u8) -> String {
    match kind {
        TransformKind::Affine => "affine".into(),
        TransformKind::Polynomial => format!("degree-{degree} polynomial"),
    }
}

/// Fits `dst ≈ P(src)` in a centered, scaled frame and expands the result
/// back into raw monomial coefficients.
fn least_squares<T: Scalar>(
    src: &[Point2<T>],
    dst: &[Point2<T>],
    kind: TransformKind,
    degree: u8,
    role: &str,
) -> Result<Transform2D<T>, GeorectifyError> {
    let m = monomial_count(degree);
    let n = src.len();
    if n < m {
        return Err(GeorectifyError::Arity {
            kind: kind_label(kind, degree),
            needed: m,
            got: n,
        });
    }
    let nf = T::from_count(n);
    let mean = |f: &dyn Fn(&Point2<T>) -> T, pts: &[Point2<T>]| pts.iter().map(f).fold(T::zero(), |a, b| a + b) / nf;
    let (cu, cv) = (mean(&|p| p.x, src), mean(&|p| p.y, src));
    let (cx, cy) = (mean(&|p| p.x, dst), mean(&|p| p.y, dst));
    let spread = (src
        .iter()
        .map(|p| (p.x - cu) * (p.x - cu) + (p.y - cv) * (p.y - cv))
        .fold(T::zero(), |a, b| a + b)
        / nf)
        .sqrt();
    if !(spread > T::zero()) || !spread.is_finite() {
        return Err(GeorectifyError::Degenerate(format!("all {role} points coincide")));
    }

    let exps = monomial_exponents(degree);
    let rows: Vec<Vec<T>> = src
        .iter()
        .map(|p| {
            let (u, v) = ((p.x - cu) / spread, (p.y - cv) / spread);
            exps.iter().map(|&(i, j)| u.powi(i as i32) * v.powi(j as i32)).collect()
        })
        .collect();

    // column scaling
    let col_scale: Vec<T> = (0..m)
        .map(|c| {
            let norm = rows.iter().map(|r| r[c] * r[c]).fold(T::zero(), |a, b| a + b).sqrt();
            if norm > T::zero() {
                T::one() / norm
            } else {
                T::one()
            }
        })
        .collect();
    let mut normal = SquareMatrix::<T>::zeros(m);
    for row in &rows {
        for a in 0..m {
            let ra = row[a] * col_scale[a];
            for b in 0..m {
                normal[(a, b)] = normal[(a, b)] + ra * row[b] * col_scale[b];
            }
        }
    }
    let cond = normal.spd_condition_number();
    let degenerate = || {
        let what = match degree {
            1 => format!("{role} points are collinear"),
            2 => format!("{role} points lie on a common conic"),
            _ => format!("{role} points lie on a common cubic curve"),
        };
        GeorectifyError::Degenerate(format!(
            "{what}; the {} design matrix is rank-deficient (condition number {:.3e})",
            kind_label(kind, degree),
            cond.as_f64()
        ))
    };
    if !cond.is_finite() || cond > T::lit(MAX_CONDITION_NUMBER) {
        return Err(degenerate());
    }
    // the normal matrix only gauges conditioning; QR does the solve so exact
    // fits reproduce their pairs to rounding level
    let scaled: Vec<Vec<T>> = rows
        .iter()
        .map(|r| r.iter().zip(&col_scale).map(|(a, s)| *a * *s).collect())
        .collect();
    let targets = vec![
        dst.iter().map(|d| d.x - cx).collect::<Vec<_>>(),
        dst.iter().map(|d| d.y - cy).collect::<Vec<_>>(),
    ];
    let sols = qr_least_squares(&scaled, &targets).ok_or_else(degenerate)?;
    let (sol_x, sol_y) = (&sols[0], &sols[1]);
    let norm_x: Vec<T> = sol_x.iter().zip(&col_scale).map(|(a, s)| *a * *s).collect();
    let norm_y: Vec<T> = sol_y.iter().zip(&col_scale).map(|(a, s)| *a * *s).collect();

    let mut coeffs_x = expand(&norm_x, degree, cu, cv, spread);
    let mut coeffs_y = expand(&norm_y, degree, cu, cv, spread);
    coeffs_x[0] = coeffs_x[0] + cx;
    coeffs_y[0] = coeffs_y[0] + cy;
    Transform2D::new(kind, degree, coeffs_x, coeffs_y)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Rewrites `Σ c_ij ((u-cu)/s)^i ((v-cv)/s)^j` as `Σ r_ab u^a v^b`.
fn expand<T: Scalar>(coeffs: &[T], degree: u8, cu: T, cv: T, s: T) -> Vec<T> {
    let exps = monomial_exponents(degree);
    let position = |a: u32, b: u32| exps.iter().position(|&e| e == (a, b)).expect("monomial in basis");
    let mut out = vec![T::zero(); exps.len()];
    for (k, &(i, j)) in exps.iter().enumerate() {
        let c = coeffs[k] / s.powi((i + j) as i32);
        if c == T::zero() {
            continue;
        }
        for a in 0..=i {
            let fa = T::lit(binomial(i, a)) * (-cu).powi((i - a) as i32);
            for b in 0..=j {
                let fb = T::lit(binomial(j, b)) * (-cv).powi((j - b) as i32);
                let idx = position(a, b);
                out[idx] = out[idx] + c * fa * fb;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::mercator_to_lonlat;
    use crate::geo::MercatorPoint;

    /// Pairs whose targets sit at the given Mercator coordinates.
    fn pairs_to(src: &[(f64, f64)], merc: &[(f64, f64)]) -> Vec<ControlPointPair<f64>> {
        src.iter()
            .zip(merc)
            .map(|(&(px, py), &(x, y))| {
                let g = mercator_to_lonlat(MercatorPoint::new(x, y)).unwrap();
                ControlPointPair::new(px, py, g.lon, g.lat)
            })
            .collect()
    }

    #[test]
    fn translation_is_recovered_exactly() {
        let src = [(0.0, 0.0), (100.0, 0.0), (0.0, 50.0)];
        let dst: Vec<_> = src.iter().map(|&(x, y)| (x + 10.0, y + 5.0)).collect();
        let t = fit_transform(&pairs_to(&src, &dst), TransformKind::Affine, 1).unwrap();
        let expect = [5.0, 0.0, 1.0];
        let expect_x = [10.0, 1.0, 0.0];
        for k in 0..3 {
            assert!((t.coeffs_x[k] - expect_x[k]).abs() < 1e-9, "{:?}", t.coeffs_x);
            assert!((t.coeffs_y[k] - expect[k]).abs() < 1e-9, "{:?}", t.coeffs_y);
        }
        let inv = fit_inverse(&pairs_to(&src, &dst), TransformKind::Affine, 1).unwrap();
        assert!((inv.coeffs_x[0] + 10.0).abs() < 1e-6);
        assert!((inv.coeffs_y[0] + 5.0).abs() < 1e-6);
    }

    #[test]
    fn uniform_scale_about_origin() {
        let src = [(1.0, 0.0), (0.0, 1.0), (3.0, 4.0)];
        let dst: Vec<_> = src.iter().map(|&(x, y)| (2.0 * x, 2.0 * y)).collect();
        let t = fit_transform(&pairs_to(&src, &dst), TransformKind::Affine, 1).unwrap();
        assert!(t.coeffs_x[0].abs() < 1e-9 && t.coeffs_y[0].abs() < 1e-9);
        assert!((t.coeffs_x[1] - 2.0).abs() < 1e-9 && t.coeffs_x[2].abs() < 1e-9);
        assert!((t.coeffs_y[2] - 2.0).abs() < 1e-9 && t.coeffs_y[1].abs() < 1e-9);
    }

    #[test]
    fn too_few_pairs() {
        let src = [(0.0, 0.0), (1.0, 0.0)];
        let err = fit_transform(&pairs_to(&src, &src), TransformKind::Affine, 1).unwrap_err();
        assert!(matches!(err, GeorectifyError::Arity { needed: 3, got: 2, .. }));
        let src6 = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (2.0, 3.0), (5.0, 1.0)];
        let err = fit_transform(&pairs_to(&src6, &src6), TransformKind::Polynomial, 2).unwrap_err();
        assert!(matches!(err, GeorectifyError::Arity { needed: 6, got: 5, .. }));
    }

    #[test]
    fn collinear_sources_are_degenerate() {
        let src = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (5.0, 5.0)];
        let dst = [(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (3.0, 3.0)];
        let err = fit_transform(&pairs_to(&src, &dst), TransformKind::Affine, 1).unwrap_err();
        match err {
            GeorectifyError::Degenerate(msg) => assert!(msg.contains("collinear"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_pairs_rejected() {
        let mut pairs = pairs_to(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        pairs[1].source.x = -1.0;
        assert!(matches!(
            fit_transform(&pairs, TransformKind::Affine, 1),
            Err(GeorectifyError::InvalidPair { index: 1, .. })
        ));
        pairs[1].source.x = 1.0;
        pairs[2].target.lat = 95.0;
        assert!(matches!(
            fit_transform(&pairs, TransformKind::Affine, 1),
            Err(GeorectifyError::InvalidPair { index: 2, .. })
        ));
    }

    #[test]
    fn exact_fit_has_zero_residual() {
        let src = [(10.0, 20.0), (500.0, 40.0), (60.0, 700.0)];
        let dst = [(-8.2e6, 4.97e6), (-8.1995e6, 4.9702e6), (-8.2001e6, 4.9695e6)];
        let pairs = pairs_to(&src, &dst);
        let t = fit_transform(&pairs, TransformKind::Affine, 1).unwrap();
        let r = residual_report(&t, &pairs).unwrap();
        assert!(r.rms < 1e-9, "{}", r.rms);
        assert!(matches!(residual_report(&t, &[]), Err(GeorectifyError::NoPairs)));
    }

    #[test]
    fn polynomial_degree_one_equals_affine() {
        let src = [(3.0, 1.0), (40.0, 2.0), (7.0, 33.0), (20.0, 20.0), (9.0, 14.0)];
        let dst = [(1.0, 2.0), (80.0, 5.0), (13.0, 70.0), (41.0, 42.0), (17.0, 30.5)];
        let pairs = pairs_to(&src, &dst);
        let a = fit_transform(&pairs, TransformKind::Affine, 1).unwrap();
        let p = fit_transform(&pairs, TransformKind::Polynomial, 1).unwrap();
        for k in 0..3 {
            assert!((a.coeffs_x[k] - p.coeffs_x[k]).abs() < 1e-12);
            assert!((a.coeffs_y[k] - p.coeffs_y[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_interpolates_ten_points() {
        let src: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let a = i as f64 * 0.7;
                (200.0 + 150.0 * a.cos() + 13.0 * i as f64, 300.0 + 120.0 * (1.3 * a).sin())
            })
            .collect();
        let dst: Vec<(f64, f64)> = src
            .iter()
            .map(|&(u, v)| (-8.2e6 + 0.5 * u + 1e-4 * u * v, 4.97e6 - 0.5 * v + 1e-7 * u * u * u))
            .collect();
        let pairs = pairs_to(&src, &dst);
        let t = fit_transform(&pairs, TransformKind::Polynomial, 3).unwrap();
        let r = residual_report(&t, &pairs).unwrap();
        assert!(r.rms < 1e-6, "{}", r.rms);
    }

    #[test]
    fn f32_fit_works() {
        let pairs: Vec<ControlPointPair<f32>> = vec![
            ControlPointPair::new(0.0, 0.0, 0.0, 0.0),
            ControlPointPair::new(100.0, 0.0, 0.001, 0.0),
            ControlPointPair::new(0.0, 100.0, 0.0, -0.001),
            ControlPointPair::new(100.0, 100.0, 0.001, -0.001),
        ];
        let t = fit_transform(&pairs, TransformKind::Affine, 1).unwrap();
        let r = residual_report(&t, &pairs).unwrap();
        assert!(r.rms < 0.05, "{}", r.rms);
    }
}
