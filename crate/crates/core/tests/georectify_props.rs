use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use timeatlas_core::geo::{lonlat_to_mercator, mercator_to_lonlat};
use timeatlas_core::georectify::{
    fit_inverse, fit_transform, residual_report, warp_raster, GeorectifyError, OutputGrid, RasterImage, Resampling,
    TransformKind,
};
use timeatlas_core::{ControlPointPair, MercatorBounds, MercatorPoint, Transform2D};
use timeatlas_testkit::oracle::rational_least_squares;

fn pair_from_merc(px: f64, py: f64, x: f64, y: f64) -> ControlPointPair {
    let g = mercator_to_lonlat(MercatorPoint::new(x, y)).unwrap();
    ControlPointPair::new(px, py, g.lon, g.lat)
}

fn rational_affine(src: &[(f64, f64)], dst: &[f64]) -> [f64; 3] {
    let rows: Vec<Vec<f64>> = src.iter().map(|&(u, v)| vec![1.0, u, v]).collect();
    let c = rational_least_squares(&rows, dst).expect("full rank");
    [c[0], c[1], c[2]]
}

#[test]
fn affine_matches_rational_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let a = [rng.random_range(0.5..3.0), rng.random_range(-0.5..0.5), rng.random_range(-8.3e6..-8.2e6)];
        let b = [rng.random_range(-0.5..0.5), rng.random_range(-3.0..-0.5), rng.random_range(4.9e6..5.0e6)];
        let n = rng.random_range(6..12);
        let mut pairs = Vec::new();
        for _ in 0..n {
            let (u, v) = (rng.random_range(0.0..2000.0), rng.random_range(0.0..2000.0));
            let x = a[0] * u + a[1] * v + a[2] + rng.random_range(-3.0..3.0);
            let y = b[0] * u + b[1] * v + b[2] + rng.random_range(-3.0..3.0);
            pairs.push(pair_from_merc(u, v, x, y));
        }
        let t = fit_transform(&pairs, TransformKind::Affine, 1).unwrap();
        // the oracle sees the same projected targets the fit does
        let src: Vec<(f64, f64)> = pairs.iter().map(|p| (p.source.x, p.source.y)).collect();
        let merc: Vec<MercatorPoint> = pairs.iter().map(|p| lonlat_to_mercator(p.target).unwrap()).collect();
        let ox = rational_affine(&src, &merc.iter().map(|m| m.x).collect::<Vec<_>>());
        let oy = rational_affine(&src, &merc.iter().map(|m| m.y).collect::<Vec<_>>());
        for k in 0..3 {
            assert!((t.coeffs_x[k] - ox[k]).abs() < 1e-6, "x[{k}]: {} vs {}", t.coeffs_x[k], ox[k]);
            assert!((t.coeffs_y[k] - oy[k]).abs() < 1e-6, "y[{k}]: {} vs {}", t.coeffs_y[k], oy[k]);
        }
        let poly = fit_transform(&pairs, TransformKind::Polynomial, 1).unwrap();
        for k in 0..3 {
            assert!((poly.coeffs_x[k] - t.coeffs_x[k]).abs() <= 1e-12 * t.coeffs_x[k].abs().max(1.0));
            assert!((poly.coeffs_y[k] - t.coeffs_y[k]).abs() <= 1e-12 * t.coeffs_y[k].abs().max(1.0));
        }
    }
}

#[test]
fn quadratic_warp_inverts_within_half_pixel() {
    let fwd = |u: f64, v: f64| {
        (
            -8_238_000.0 + 1.2 * u + 0.1 * v + 2e-5 * u * u - 1e-5 * u * v,
            4_970_000.0 - 0.05 * u - 1.1 * v + 1.5e-5 * v * v + 5e-6 * u * u,
        )
    };
    let mut pairs = Vec::new();
    for i in 0..4 {
        for j in 0..3 {
            let (u, v) = (100.0 + 300.0 * i as f64, 150.0 + 400.0 * j as f64);
            let (x, y) = fwd(u, v);
            pairs.push(pair_from_merc(u, v, x, y));
        }
    }
    let inv = fit_inverse(&pairs, TransformKind::Polynomial, 2).unwrap();
    for i in 0..=10 {
        for j in 0..=10 {
            let (u, v) = (100.0 + 90.0 * i as f64, 150.0 + 80.0 * j as f64);
            let (x, y) = fwd(u, v);
            let (pu, pv) = inv.eval(x, y);
            assert!((pu - u).hypot(pv - v) < 0.5, "({u},{v}) -> ({pu},{pv})");
        }
    }
}

fn rss(t: &Transform2D, pairs: &[ControlPointPair]) -> f64 {
    residual_report(t, pairs).unwrap().per_pair.iter().map(|r| r.error * r.error).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_interpolation_at_minimum_arity(degree in 1u8..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = (degree as usize + 1) * (degree as usize + 2) / 2;
        let pairs: Vec<_> = (0..m)
            .map(|_| {
                let (u, v) = (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0));
                pair_from_merc(u, v, 1.0e5 + rng.random_range(-500.0..500.0), 2.0e5 + rng.random_range(-500.0..500.0))
            })
            .collect();
        match fit_transform(&pairs, TransformKind::Polynomial, degree) {
            Ok(t) => prop_assert!(residual_report(&t, &pairs).unwrap().rms < 1e-9 * 1e3),
            Err(GeorectifyError::Degenerate(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn fitted_coefficients_are_a_minimum(seed in any::<u64>(), degree in 1u8..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<_> = (0..15)
            .map(|_| {
                let (u, v) = (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0));
                pair_from_merc(u, v, 3.0e5 + u * 0.9 + rng.random_range(-20.0..20.0), -2.0e5 - v + rng.random_range(-20.0..20.0))
            })
            .collect();
        let t = fit_transform(&pairs, TransformKind::Polynomial, degree).unwrap();
        let base = rss(&t, &pairs);
        for k in 0..t.coeffs_x.len() {
            for axis in 0..2 {
                for d in [1e-3, -1e-3] {
                    let mut p = t.clone();
                    if axis == 0 { p.coeffs_x[k] += d } else { p.coeffs_y[k] += d }
                    prop_assert!(rss(&p, &pairs) >= base * (1.0 - 1e-12), "coefficient {k} axis {axis}");
                }
            }
        }
    }
}

#[test]
fn exact_rms_is_zero_for_three_pairs() {
    let pairs = [
        pair_from_merc(0.0, 0.0, 10.0, 5.0),
        pair_from_merc(100.0, 0.0, 110.0, 5.0),
        pair_from_merc(0.0, 100.0, 10.0, 105.0),
    ];
    let t = fit_transform(&pairs, TransformKind::Affine, 1).unwrap();
    assert!(residual_report(&t, &pairs).unwrap().rms < 1e-9);
    assert!(matches!(
        fit_transform(&pairs[..2], TransformKind::Affine, 1),
        Err(GeorectifyError::Arity { needed: 3, got: 2, .. })
    ));
    let inv = fit_inverse(&pairs, TransformKind::Affine, 1).unwrap();
    for p in &pairs {
        let m = t.apply(p.source);
        let (u, v) = inv.eval(m.x, m.y);
        assert!((u - p.source.x).abs() < 1e-6 && (v - p.source.y).abs() < 1e-6);
    }
}

#[test]
fn identity_warp_preserves_pixels() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (w, h) = (17u32, 11u32);
    let data: Vec<u8> = (0..w * h * 4).map(|_| rng.random()).collect();
    let img = RasterImage::new(w, h, 4, data.clone()).unwrap();
    // the output grid's row 0 is north, so flip v to keep image rows in order
    let inv = Transform2D::affine([1.0, 0.0, 0.0], [0.0, -1.0, h as f64]);
    let grid = OutputGrid { bounds: MercatorBounds::new(0.0, 0.0, w as f64, h as f64), width: w, height: h };
    for r in [Resampling::Nearest, Resampling::Bilinear] {
        assert_eq!(warp_raster(&img, &inv, &grid, r).unwrap().data, data);
    }
}
