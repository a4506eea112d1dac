use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use timeatlas_core::facade::{
    estimate_vanishing_points, extract_params, rectifying_homography, regularize_grid, FacadeBox, FacadeLabel, FacadeGrid,
    LineSegment,
};
use timeatlas_core::Point2;
use timeatlas_testkit::facade::{jitter, per_axis_affine_residual, synthetic_facade, GridSpec};

fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    // sign-free: a vanishing direction is a line, not a ray
    (a[0] * b[1] - a[1] * b[0]).abs().atan2((a[0] * b[0] + a[1] * b[1]).abs()).to_degrees()
}

#[test]
fn rectification_recovers_frontal_geometry() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = synthetic_facade(&mut rng);
        let segs: Vec<LineSegment<f64>> =
            f.segments.iter().map(|s| LineSegment::new(s[0], s[1], s[2], s[3]).unwrap()).collect();
        let (vh, vv) = estimate_vanishing_points(&segs).unwrap();

        let c = [f.width / 2.0, f.height / 2.0];
        let (th, tv) = f.true_vp_directions(c);
        let dh = vh.direction_from(Point2::new(c[0], c[1]));
        let dv = vv.direction_from(Point2::new(c[0], c[1]));
        assert!(angle_between(th, [dh.x, dh.y]) < 0.5, "seed {seed}: horizontal VP off");
        assert!(angle_between(tv, [dv.x, dv.y]) < 0.5, "seed {seed}: vertical VP off");

        let h = rectifying_homography(&vh, &vv, f.width, f.height).unwrap();
        let rectified: Vec<[f64; 2]> = f
            .image_corners
            .iter()
            .map(|p| {
                let q = h.apply(Point2::new(p[0], p[1])).unwrap();
                [q.x, q.y]
            })
            .collect();
        // compare in the frontal pixel scale: fit rectified -> frontal
        let r = per_axis_affine_residual(&rectified, &f.frontal_corners);
        assert!(r < 1.0, "seed {seed}: residual {r} px");
    }
}

#[test]
fn jittered_grid_is_recovered() {
    let spec = GridSpec { rows: 3, cols: 4, x0: 40.0, y0: 30.0, dx: 120.0, dy: 150.0, w: 60.0, h: 90.0 };
    let truth = spec.boxes();
    // cell structure is recovered for every seed
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = regularize_grid(&jitter(&mut rng, &truth, 2.0));
        assert_eq!((grid.rows.len(), grid.columns.len()), (3, 4));
        for (k, gb) in grid.boxes.iter().enumerate() {
            assert_eq!((gb.row, gb.col), (k / 4, k % 4), "seed {seed}");
        }
    }
    // fixed-seed geometry: snapped centers within 1 px of the generator
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid = regularize_grid(&jitter(&mut rng, &truth, 2.0));
    for (gb, t) in grid.boxes.iter().zip(&truth) {
        let (a, e) = (gb.bbox.center(), t.center());
        assert!((a.x - e.x).abs() <= 1.0 && (a.y - e.y).abs() <= 1.0, "{a:?} vs {e:?}");
    }
}

fn boxes_strategy() -> impl Strategy<Value = Vec<FacadeBox<f64>>> {
    (1usize..5, 1usize..6, any::<u64>()).prop_map(|(rows, cols, seed)| {
        let spec = GridSpec { rows, cols, x0: 10.0, y0: 20.0, dx: 50.0, dy: 70.0, w: 25.0, h: 40.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = jitter(&mut rng, &spec.boxes(), 4.0);
        b.shuffle(&mut rng);
        b
    })
}

fn window_boxes(g: &FacadeGrid<f64>) -> Vec<FacadeBox<f64>> {
    g.boxes.iter().map(|b| b.bbox).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rows_share_one_height(boxes in boxes_strategy()) {
        let g = regularize_grid(&boxes);
        for row in &g.rows {
            for &i in &row.members {
                prop_assert_eq!(g.boxes[i].bbox.h, row.height);
                prop_assert_eq!(g.boxes[i].bbox.y, row.y);
            }
        }
        for col in &g.columns {
            for &i in &col.members {
                prop_assert_eq!(g.boxes[i].bbox.w, col.width);
            }
        }
    }

    #[test]
    fn regularization_is_idempotent(boxes in boxes_strategy()) {
        let once = regularize_grid(&boxes);
        let twice = regularize_grid(&window_boxes(&once));
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn input_order_is_irrelevant(boxes in boxes_strategy(), seed in any::<u64>()) {
        let mut shuffled = boxes.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(regularize_grid(&boxes), regularize_grid(&shuffled));
    }
}

#[test]
fn params_from_known_grid() {
    // 2 x 3 windows of 10 x 20 px on a 100 x 80 px facade that is 10 m x 8 m
    let spec = GridSpec { rows: 2, cols: 3, x0: 15.0, y0: 10.0, dx: 30.0, dy: 35.0, w: 10.0, h: 20.0 };
    let grid = regularize_grid(&spec.boxes());
    let facade = FacadeBox::new(FacadeLabel::Storefront, 0.0, 0.0, 100.0, 80.0);
    let p = extract_params(&grid, &[], &facade, 10.0, 8.0).unwrap();
    assert_eq!((p.n_rows, p.n_cols), (2, 3));
    for row in &p.rows {
        assert!((row.window_width_m - 1.0).abs() < 1e-12);
        assert!((row.window_height_m - 2.0).abs() < 1e-12);
        assert!((row.ratio - 0.5).abs() < 1e-12);
        assert_eq!(row.columns, vec![0, 1, 2]);
    }
    // top row spans 10..30 px -> bottom at 80 - 30 = 50 px = 5 m
    assert!((p.rows[0].bottom_m - 5.0).abs() < 1e-12);
    assert!((p.rows[1].bottom_m - 1.5).abs() < 1e-12);
    for (u, e) in p.column_centers.iter().zip([0.2, 0.5, 0.8]) {
        assert!((u - e).abs() < 1e-12, "{:?}", p.column_centers);
    }
}
