//! Small dense linear algebra over [`Scalar`].
//!
//! Matrices here are tiny (at most 10x10 for cubic transform fits, 3x3
//! for homographies), so plain row-major `Vec`s and textbook algorithms
//! are all that is needed.

use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `self * x = rhs` for a symmetric positive definite matrix.
    ///
    /// Returns `None` when a pivot is not strictly positive.
    pub fn cholesky_solve(&self, rhs: &[T]) -> Option<Vec<T>> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        // forward: L y = b
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s = s - l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        // backward: L^T x = y
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s = s - l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        Some(x)
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in ascending order and the matching unit
    /// eigenvectors (as columns, i.e. `vectors[k]` pairs with `values[k]`).
    pub fn symmetric_eigen(&self) -> (Vec<T>, Vec<Vec<T>>) {
        let n = self.n;
        let mut a = self.clone();
        let mut v = Self::identity(n);
        let eps = T::epsilon();
        for _sweep in 0..100 {
            let mut off = T::zero();
            let mut total = T::zero();
            for i in 0..n {
                for j in 0..n {
                    let sq = a[(i, j)] * a[(i, j)];
                    total = total + sq;
                    if i != j {
                        off = off + sq;
                    }
                }
            }
            if off <= eps * eps * total || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let app = a[(p, p)];
                    let aqq = a[(q, q)];
                    let two = T::one() + T::one();
                    let theta = (aqq - app) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a[(i, i)]
                .partial_cmp(&a[(j, j)])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let vectors = order
            .iter()
            .map(|&i| (0..n).map(|k| v[(k, i)]).collect())
            .collect();
        (values, vectors)
    }

    /// 2-norm condition number of a symmetric positive semi-definite matrix.
    ///
    /// Infinite when the smallest eigenvalue is not positive.
    pub fn spd_condition_number(&self) -> T {
        let (values, _) = self.symmetric_eigen();
        let lo = values[0];
        let hi = values[values.len() - 1];
        if !(lo > T::zero()) {
            T::infinity()
        } else {
            hi / lo
        }
    }
}

/// Least-squares solution of `a * x = b` for each right-hand side by
/// Householder QR, which avoids squaring the condition number the way the
/// normal equations do. `a` is `rows x cols` with `rows >= cols`.
///
/// Returns `None` when a column is numerically dependent on earlier ones.
#[allow(clippy::needless_range_loop)] // column-wise access into row-major storage
pub fn qr_least_squares<T: Scalar>(a: &[Vec<T>], rhs: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    assert!(rows >= cols);
    let mut r: Vec<Vec<T>> = a.to_vec();
    let mut b: Vec<Vec<T>> = rhs.to_vec();
    let scale = a.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    for k in 0..cols {
        let norm = (k..rows).map(|i| r[i][k] * r[i][k]).fold(T::zero(), |s, v| s + v).sqrt();
        if !(norm > scale * T::epsilon() * T::from_count(rows)) {
            return None;
        }
        let alpha = if r[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..rows).map(|i| r[i][k]).collect();
        v[0] = v[0] - alpha;
        let vv = v.iter().fold(T::zero(), |s, x| s + *x * *x);
        for j in k..cols {
            let dot = (k..rows).fold(T::zero(), |s, i| s + v[i - k] * r[i][j]);
            let f = (dot + dot) / vv;
            for i in k..rows {
                r[i][j] = r[i][j] - f * v[i - k];
            }
        }
        for rhs in b.iter_mut() {
            let dot = (k..rows).fold(T::zero(), |s, i| s + v[i - k] * rhs[i]);
            let f = (dot + dot) / vv;
            for i in k..rows {
                rhs[i] = rhs[i] - f * v[i - k];
            }
        }
    }
    Some(
        b.iter()
            .map(|rhs| {
                let mut x = vec![T::zero(); cols];
                for k in (0..cols).rev() {
                    let s = ((k + 1)..cols).fold(rhs[k], |s, j| s - r[k][j] * x[j]);
                    x[k] = s / r[k][k];
                }
                x
            })
            .collect(),
    )
}

impl<T> std::ops::Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.n + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.n + c]
    }
}

/// 3x3 matrix stored row-major; used for homographies and line geometry.
pub type Mat3<T> = [[T; 3]; 3];
pub type Vec3<T> = [T; 3];

pub fn mat3_identity<T: Scalar>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

pub fn mat3_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
        }
    }
    out
}

pub fn mat3_vec<T: Scalar>(m: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat3_det<T: Scalar>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by adjugate; `None` when the determinant is exactly zero.
pub fn mat3_inverse<T: Scalar>(m: &Mat3<T>) -> Option<Mat3<T>> {
    let det = mat3_det(m);
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    let inv = T::one() / det;
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    Some([
        [c(1, 1, 2, 2) * inv, -c(0, 1, 2, 2) * inv, c(0, 1, 1, 2) * inv],
        [-c(1, 0, 2, 2) * inv, c(0, 0, 2, 2) * inv, -c(0, 0, 1, 2) * inv],
        [c(1, 0, 2, 1) * inv, -c(0, 0, 2, 1) * inv, c(0, 0, 1, 1) * inv],
    ])
}

pub fn cross3<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot3<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3<T: Scalar>(a: &Vec3<T>) -> T {
    dot3(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_small_system() {
        let mut m = SquareMatrix::<f64>::zeros(2);
        m[(0, 0)] = 4.0;
        m[(0, 1)] = 2.0;
        m[(1, 0)] = 2.0;
        m[(1, 1)] = 3.0;
        let x = m.cholesky_solve(&[2.0, 1.0]).unwrap();
        // 4a + 2b = 2, 2a + 3b = 1 -> a = 0.5, b = 0
        assert!((x[0] - 0.5).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_singular() {
        let mut m = SquareMatrix::<f64>::zeros(2);
        m[(0, 0)] = 1.0;
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        m[(1, 1)] = 1.0;
        assert!(m.cholesky_solve(&[1.0, 1.0]).is_none());
        assert!(m.spd_condition_number().is_infinite() || m.spd_condition_number() > 1e15);
    }

    #[test]
    fn qr_fits_a_line_and_rejects_dependent_columns() {
        // y = 2 + 3x through (0,2), (1,5), (2,8) plus a pulled point (3,12):
        // normal equations give intercept 1.8 and slope 3.3
        let a: Vec<Vec<f64>> = (0..4).map(|x| vec![1.0, x as f64]).collect();
        let x = qr_least_squares(&a, &[vec![2.0, 5.0, 8.0, 12.0]]).unwrap();
        assert!((x[0][0] - 1.8).abs() < 1e-12 && (x[0][1] - 3.3).abs() < 1e-12, "{x:?}");
        let dependent: Vec<Vec<f64>> = (0..4).map(|x| vec![x as f64, 2.0 * x as f64]).collect();
        assert!(qr_least_squares(&dependent, &[vec![0.0; 4]]).is_none());
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        let mut m = SquareMatrix::<f64>::zeros(3);
        let vals = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        for r in 0..3 {
            for c in 0..3 {
                m[(r, c)] = vals[r][c];
            }
        }
        let (ev, vecs) = m.symmetric_eigen();
        let s2 = 2f64.sqrt();
        let expected = [2.0 - s2, 2.0, 2.0 + s2];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        for (k, v) in vecs.iter().enumerate() {
            for r in 0..3 {
                let mv: f64 = (0..3).map(|c| vals[r][c] * v[c]).sum();
                assert!((mv - ev[k] * v[r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mat3_inverse_roundtrip() {
        let m: Mat3<f64> = [[2.0, 0.3, 1.0], [0.1, 1.5, -2.0], [0.01, 0.002, 1.0]];
        let inv = mat3_inverse(&m).unwrap();
        let p = mat3_mul(&m, &inv);
        for r in 0..3 {
            for c in 0..3 {
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((p[r][c] - e).abs() < 1e-12);
            }
        }
    }
}
