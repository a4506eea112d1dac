//! Exact rational arithmetic oracles.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

fn q(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite input")
}

/// Least-squares solution of `A c = b` via the normal equations, solved
/// exactly over the rationals. Every `f64` input is converted exactly.
pub fn rational_least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = rows.first()?.len();
    let mut n = vec![vec![BigRational::zero(); m + 1]; m];
    for (row, &b) in rows.iter().zip(rhs) {
        let r: Vec<BigRational> = row.iter().map(|&v| q(v)).collect();
        let b = q(b);
        for i in 0..m {
            for j in 0..m {
                n[i][j] += &r[i] * &r[j];
            }
            n[i][m] += &r[i] * &b;
        }
    }
    for col in 0..m {
        let piv = (col..m).find(|&i| !n[i][col].is_zero())?;
        n.swap(col, piv);
        for i in 0..m {
            if i != col && !n[i][col].is_zero() {
                let f = &n[i][col] / &n[col][col];
                for j in col..=m {
                    let t = &f * &n[col][j];
                    n[i][j] -= t;
                }
            }
        }
    }
    (0..m).map(|i| (&n[i][m] / &n[i][i]).to_f64()).collect()
}

/// Exact shoelace area (positive for counter-clockwise rings).
pub fn rational_shoelace(ring: &[[f64; 2]]) -> f64 {
    let mut acc = BigRational::zero();
    for i in 0..ring.len() {
        let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
        acc += q(a[0]) * q(b[1]) - q(b[0]) * q(a[1]);
    }
    (acc / BigRational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN)
}
