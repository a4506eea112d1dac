//! Seeded random inputs.

use rand::Rng;
use serde_json::{json, Value as Json};
use timeatlas_core::tiling::{ring_area2, GeomType, TileFeature, TileLayer, Value};

/// Star-shaped, hence simple, counter-clockwise polygon around the origin
/// with `n` vertices at radii in `[r_min, r_max]`.
pub fn star_polygon<R: Rng>(rng: &mut R, n: usize, r_min: f64, r_max: f64) -> Vec<[f64; 2]> {
    // one jittered angle per sector keeps every gap below pi, so the ring
    // stays star-shaped around the origin and therefore simple
    let n = n.max(3);
    let sector = std::f64::consts::TAU / n as f64;
    let angles: Vec<f64> = (0..n).map(|i| (i as f64 + rng.random_range(0.0..0.5)) * sector).collect();
    angles
        .iter()
        .map(|a| {
            let r = rng.random_range(r_min..=r_max);
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

fn random_value<R: Rng>(rng: &mut R) -> Value {
    match rng.random_range(0..7) {
        0 => Value::String(format!("s{}", rng.random_range(0..50))),
        1 => Value::Float(rng.random_range(-1e6f32..1e6)),
        2 => Value::Double(rng.random_range(-1e12..1e12)),
        3 => Value::Int(rng.random()),
        4 => Value::UInt(rng.random()),
        5 => Value::SInt(rng.random()),
        _ => Value::Bool(rng.random()),
    }
}

fn coord<R: Rng>(rng: &mut R) -> [i32; 2] {
    [rng.random_range(-128..4224), rng.random_range(-128..4224)]
}

fn oriented(mut ring: Vec<[i32; 2]>, exterior: bool) -> Vec<[i32; 2]> {
    if (ring_area2(&ring) > 0) != exterior {
        ring.reverse();
    }
    ring
}

fn random_paths<R: Rng>(rng: &mut R, t: GeomType) -> Vec<Vec<[i32; 2]>> {
    match t {
        GeomType::Point => (0..rng.random_range(1..5)).map(|_| vec![coord(rng)]).collect(),
        GeomType::LineString => (0..rng.random_range(1..4))
            .map(|_| (0..rng.random_range(2..7)).map(|_| coord(rng)).collect())
            .collect(),
        _ => {
            let mut paths = Vec::new();
            for _ in 0..rng.random_range(1..3) {
                let [x, y] = [rng.random_range(-100..3800), rng.random_range(-100..3800)];
                let (w, h) = (rng.random_range(20..400), rng.random_range(20..400));
                paths.push(oriented(vec![[x, y], [x + w, y], [x + w, y + h], [x, y + h]], true));
                if rng.random_bool(0.4) {
                    let [hx, hy] = [x + w / 4, y + h / 4];
                    paths.push(oriented(vec![[hx, hy], [hx + w / 2, hy], [hx + w / 4, hy + h / 2]], false));
                }
            }
            paths
        }
    }
}

/// 1 to 3 uniquely named layers of random features covering all geometry
/// and value types.
pub fn random_tile<R: Rng>(rng: &mut R) -> Vec<TileLayer> {
    let n_layers = rng.random_range(1..=3);
    (0..n_layers)
        .map(|li| {
            let mut layer = TileLayer::new(format!("layer{li}"));
            layer.extent = [256, 512, 4096, 8192][rng.random_range(0..4)];
            for _ in 0..rng.random_range(0..12) {
                let geom_type = [GeomType::Point, GeomType::LineString, GeomType::Polygon][rng.random_range(0..3)];
                let n_tags = rng.random_range(0..5);
                let tags = (0..n_tags).map(|k| (format!("k{k}"), random_value(rng))).collect();
                layer.features.push(TileFeature {
                    id: rng.random_bool(0.8).then(|| rng.random_range(1..1_000_000)),
                    geom_type,
                    paths: random_paths(rng, geom_type),
                    tags,
                });
            }
            layer
        })
        .collect()
}

/// Random GeoJSON features inside `[lon0, lon0 + span] x [lat0, lat0 + span]`
/// with random kinds and existence spans between 1890 and 1970.
pub fn random_features<R: Rng>(rng: &mut R, n: usize, lon0: f64, lat0: f64, span: f64) -> Vec<Json> {
    (0..n)
        .map(|_| {
            let (cx, cy) = (lon0 + rng.random_range(0.0..span), lat0 + rng.random_range(0.0..span));
            let size = rng.random_range(0.00002..span / 20.0);
            let geometry = match rng.random_range(0..4) {
                0 => json!({"type": "Point", "coordinates": [cx, cy]}),
                1 => json!({"type": "LineString", "coordinates": [[cx, cy], [cx + size, cy + size / 2.0], [cx + size, cy - size]]}),
                _ => {
                    let n = rng.random_range(3..9);
                    let mut ring: Vec<Json> = star_polygon(rng, n, size / 3.0, size)
                        .into_iter()
                        .map(|[x, y]| json!([cx + x, cy + y]))
                        .collect();
                    ring.push(ring[0].clone());
                    json!({"type": "Polygon", "coordinates": [ring]})
                }
            };
            let kind = ["building", "road", "other"][rng.random_range(0..3)];
            let start = rng.random_range(1890..1960);
            let mut props = json!({"kind": kind, "start_date": format!("{start}-{:02}-01", rng.random_range(1..13))});
            if rng.random_bool(0.6) {
                props["end_date"] = json!(format!("{}", rng.random_range(start + 1..1971)));
            }
            json!({"type": "Feature", "geometry": geometry, "properties": props})
        })
        .collect()
}
