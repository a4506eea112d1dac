//! Synthetic two-block neighbourhood, 1900 to 1960.
//!
//! Twelve building footprints (several demolished and replaced), three
//! streets, three annotated facade photos, an exact control-point set and
//! a rasterized "scan" of the 1905 state. Everything is computed from fixed
//! numbers, so repeated runs write identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value as Json};
use timeatlas_core::facade::{Annotation, EdgeLink, FacadeBox, FacadeLabel, ImageSize, Region};
use timeatlas_core::geo::{lonlat_to_mercator, mercator_to_lonlat};
use timeatlas_core::georectify::RasterImage;
use timeatlas_core::reconstruct::ReconstructParams;
use timeatlas_core::{Date, GeoBounds, GeoPoint, MercatorPoint};

use crate::error::{write_file, CliError, CliResult};

/// Lon/lat of the local origin (south-west corner of the west block).
pub const ORIGIN: (f64, f64) = (-74.0, 40.725);

/// Date of the state drawn into `scan.png`.
pub const SCAN_YEAR: i32 = 1905;

/// Mercator meters per scan pixel.
const SCAN_SCALE: f64 = 0.5;
const SCAN_ROTATION_DEG: f64 = 2.0;
const SCAN_SIZE: (u32, u32) = (640, 280);

struct Lot {
    /// Local Mercator meters: `[x0, y0, x1, y1]`.
    rect: [f64; 4],
    start: &'static str,
    end: Option<&'static str>,
    floors: u32,
    name: &'static str,
}

const LOTS: [Lot; 12] = [
    Lot { rect: [0.0, 0.0, 20.0, 25.0], start: "1890", end: Some("1925-06-01"), floors: 3, name: "Corner house" },
    Lot { rect: [20.0, 0.0, 40.0, 25.0], start: "1900", end: Some("1925-06-01"), floors: 3, name: "Bakery" },
    Lot { rect: [0.0, 0.0, 40.0, 30.0], start: "1926", end: None, floors: 6, name: "Merged loft" },
    Lot { rect: [40.0, 0.0, 60.0, 25.0], start: "1880", end: None, floors: 4, name: "Row house" },
    Lot { rect: [60.0, 0.0, 90.0, 28.0], start: "1905", end: Some("1950"), floors: 5, name: "Warehouse" },
    Lot { rect: [60.0, 0.0, 90.0, 35.0], start: "1952", end: None, floors: 8, name: "Office block" },
    Lot { rect: [90.0, 0.0, 120.0, 25.0], start: "1910", end: None, floors: 5, name: "Hotel" },
    Lot { rect: [150.0, 0.0, 180.0, 25.0], start: "1895", end: Some("1940"), floors: 3, name: "Chapel" },
    Lot { rect: [180.0, 0.0, 210.0, 25.0], start: "1900", end: Some("1940"), floors: 4, name: "Printing shop" },
    Lot { rect: [150.0, 0.0, 210.0, 32.0], start: "1942", end: None, floors: 7, name: "Department store" },
    Lot { rect: [210.0, 0.0, 240.0, 26.0], start: "1920", end: None, floors: 5, name: "Bank" },
    Lot { rect: [240.0, 0.0, 270.0, 25.0], start: "1900", end: Some("1958"), floors: 4, name: "Tenement" },
];

struct Street {
    path: [[f64; 2]; 2],
    start: &'static str,
    end: Option<&'static str>,
    name: &'static str,
}

const STREETS: [Street; 3] = [
    Street { path: [[-15.0, -10.0], [285.0, -10.0]], start: "1850", end: None, name: "Front Street" },
    Street { path: [[135.0, -25.0], [135.0, 80.0]], start: "1898", end: None, name: "Cross Street" },
    Street { path: [[150.0, 50.0], [270.0, 50.0]], start: "1900", end: Some("1930"), name: "Mews" },
];

/// Facade photos: (lot index, rows, cols, extra component, perspective).
struct Photo {
    lot: usize,
    rows: usize,
    cols: usize,
    extra: Option<FacadeLabel>,
    /// Projective terms `[h00, h01, h10, h11, h20, h21]` around the image center.
    perspective: [f64; 6],
}

const PHOTOS: [Photo; 3] = [
    Photo { lot: 3, rows: 2, cols: 3, extra: None, perspective: [1.04, 0.02, -0.01, 0.98, 1.5e-4, -5e-5] },
    Photo { lot: 6, rows: 3, cols: 4, extra: Some(FacadeLabel::Entry), perspective: [0.97, -0.03, 0.02, 1.03, -2e-4, 8e-5] },
    Photo { lot: 10, rows: 3, cols: 3, extra: Some(FacadeLabel::Entry), perspective: [1.02, 0.01, 0.03, 0.96, 1e-4, 1.2e-4] },
];

const PHOTO_SIZE: (f64, f64) = (1000.0, 800.0);

/// Store id of a lot after ingesting `features.geojson` into an empty store
/// (ids are assigned in document order starting at 1).
pub fn lot_feature_id(lot: usize) -> u64 {
    lot as u64 + 1
}

fn origin() -> MercatorPoint {
    lonlat_to_mercator(GeoPoint::new(ORIGIN.0, ORIGIN.1)).expect("origin is inside the projection")
}

fn local_to_lonlat(x: f64, y: f64) -> [f64; 2] {
    let o = origin();
    let g = mercator_to_lonlat(MercatorPoint::new(o.x + x, o.y + y)).expect("demo coordinates are valid");
    [g.lon, g.lat]
}

fn lot_ring(lot: &Lot) -> Vec<[f64; 2]> {
    let [x0, y0, x1, y1] = lot.rect;
    // counter-clockwise from the south-west corner, so edge 0 is the street front
    [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]
        .iter()
        .map(|p| local_to_lonlat(p[0], p[1]))
        .collect()
}

fn lot_feature(lot: &Lot) -> Json {
    let mut props = json!({
        "kind": "building",
        "name": lot.name,
        "floors": lot.floors,
        "start_date": lot.start,
    });
    if let Some(end) = lot.end {
        props["end_date"] = json!(end);
    }
    json!({
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [lot_ring(lot)]},
        "properties": props,
    })
}

/// All demo features, buildings first, as a FeatureCollection.
pub fn demo_features() -> Json {
    let mut features: Vec<Json> = LOTS.iter().map(lot_feature).collect();
    for s in &STREETS {
        let mut props = json!({"kind": "road", "name": s.name, "start_date": s.start});
        if let Some(end) = s.end {
            props["end_date"] = json!(end);
        }
        let coords: Vec<[f64; 2]> = s.path.iter().map(|p| local_to_lonlat(p[0], p[1])).collect();
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": props,
        }));
    }
    json!({"type": "FeatureCollection", "features": features})
}

/// Lon/lat box around both blocks and their streets.
pub fn demo_viewport() -> GeoBounds {
    let sw = local_to_lonlat(-40.0, -40.0);
    let ne = local_to_lonlat(310.0, 100.0);
    GeoBounds::new(sw[0], sw[1], ne[0], ne[1])
}

type Mat3 = [[f64; 3]; 3];

fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn project(h: &Mat3, p: [f64; 2]) -> [f64; 2] {
    let v: Vec<f64> = (0..3).map(|i| h[i][0] * p[0] + h[i][1] * p[1] + h[i][2]).collect();
    [v[0] / v[2], v[1] / v[2]]
}

fn photo_homography(p: &Photo) -> Mat3 {
    let [a, b, c, d, e, f] = p.perspective;
    let (cx, cy) = (PHOTO_SIZE.0 / 2.0, PHOTO_SIZE.1 / 2.0);
    let shift = |x: f64, y: f64| [[1.0, 0.0, x], [0.0, 1.0, y], [0.0, 0.0, 1.0]];
    let persp = [[a, b, 0.0], [c, d, 0.0], [e, f, 1.0]];
    mul(&mul(&shift(cx, cy), &persp), &shift(-cx, -cy))
}

/// Projects a frontal rectangle: returns its image-space hull and adds its
/// four edges to `segments`.
fn photograph(h: &Mat3, r: [f64; 4], segments: &mut Vec<[f64; 4]>) -> [f64; 4] {
    let [x0, y0, x1, y1] = r;
    let img: Vec<[f64; 2]> = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]].iter().map(|&c| project(h, c)).collect();
    for k in 0..4 {
        let (a, b) = (img[k], img[(k + 1) % 4]);
        segments.push([a[0], a[1], b[0], b[1]]);
    }
    let xs = img.iter().map(|p| p[0]);
    let ys = img.iter().map(|p| p[1]);
    [
        xs.clone().fold(f64::INFINITY, f64::min),
        ys.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
        ys.fold(f64::NEG_INFINITY, f64::max),
    ]
}

fn hull_box(label: FacadeLabel, r: [f64; 4]) -> FacadeBox<f64> {
    FacadeBox::new(label, r[0], r[1], r[2] - r[0], r[3] - r[1])
}

/// The three annotated facade photos, each linked to edge 0 (the street
/// front) of its building.
pub fn demo_annotations() -> Vec<Annotation> {
    PHOTOS
        .iter()
        .map(|p| {
            let h = photo_homography(p);
            let mut segments = Vec::new();
            // frontal facade spans [50, 950] x [50, 750]; ground at y = 750
            let facade = photograph(&h, [50.0, 50.0, 950.0, 750.0], &mut segments);
            let top = 90.0;
            let bottom = if p.extra.is_some() { 560.0 } else { 700.0 };
            let dy = (bottom - top) / p.rows as f64;
            let dx = 900.0 / p.cols as f64;
            let mut boxes = Vec::new();
            for r in 0..p.rows {
                for c in 0..p.cols {
                    let x0 = 50.0 + c as f64 * dx + dx * 0.25;
                    let y0 = top + r as f64 * dy + dy * 0.2;
                    let hull = photograph(&h, [x0, y0, x0 + dx * 0.5, y0 + dy * 0.6], &mut segments);
                    boxes.push(hull_box(FacadeLabel::Window, hull));
                }
            }
            if let Some(label) = p.extra {
                let hull = photograph(&h, [440.0, 600.0, 560.0, 750.0], &mut segments);
                boxes.push(hull_box(label, hull));
            }
            Annotation {
                image: ImageSize {
                    width: PHOTO_SIZE.0,
                    height: PHOTO_SIZE.1,
                },
                facade: Some(Region {
                    x: facade[0],
                    y: facade[1],
                    w: facade[2] - facade[0],
                    h: facade[3] - facade[1],
                }),
                boxes,
                link: Some(EdgeLink {
                    feature_id: lot_feature_id(p.lot),
                    edge_index: 0,
                }),
                segments: Some(segments),
                real_size: None,
            }
        })
        .collect()
}

/// Scan pixel -> local Mercator meters (exact affine).
fn scan_to_local(px: f64, py: f64) -> [f64; 2] {
    let (s, c) = SCAN_ROTATION_DEG.to_radians().sin_cos();
    let (u, v) = (px * SCAN_SCALE, py * SCAN_SCALE);
    [-25.0 + c * u + s * v, 110.0 + s * u - c * v]
}

/// Control points at the scan's corners and interior, exact under the
/// scan's affine georeference.
pub fn demo_control_points() -> Vec<[f64; 4]> {
    let (w, h) = (SCAN_SIZE.0 as f64, SCAN_SIZE.1 as f64);
    [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h], [w * 0.3, h * 0.6], [w * 0.7, h * 0.25]]
        .iter()
        .map(|&[px, py]| {
            let [x, y] = scan_to_local(px, py);
            let [lon, lat] = local_to_lonlat(x, y);
            [px, py, lon, lat]
        })
        .collect()
}

fn point_in_rect(p: [f64; 2], r: [f64; 4]) -> bool {
    p[0] >= r[0] && p[0] <= r[2] && p[1] >= r[1] && p[1] <= r[3]
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Whether a lifetime contains January 1 of `year`.
fn standing(start: &str, end: Option<&str>, year: i32) -> bool {
    let date = |s: &str| s.parse::<Date>().expect("demo dates are valid");
    let at = Date::from_year(year).expect("demo years are valid");
    date(start) <= at && end.is_none_or(|e| at < date(e))
}

/// Grayscale rendering of the `SCAN_YEAR` state: background, streets, buildings.
pub fn demo_scan() -> RasterImage {
    let (w, h) = SCAN_SIZE;
    let mut data = Vec::with_capacity(w as usize * h as usize);
    for py in 0..h {
        for px in 0..w {
            let p = scan_to_local(px as f64 + 0.5, py as f64 + 0.5);
            let building = LOTS
                .iter()
                .any(|l| standing(l.start, l.end, SCAN_YEAR) && point_in_rect(p, l.rect));
            let street = STREETS
                .iter()
                .any(|s| standing(s.start, s.end, SCAN_YEAR) && segment_distance(p, s.path[0], s.path[1]) < 4.0);
            data.push(match (building, street) {
                (true, _) => 60,
                (false, true) => 180,
                _ => 235,
            });
        }
    }
    RasterImage::new(w, h, 1, data).expect("buffer matches scan size")
}

fn pretty(v: &impl serde::Serialize) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(CliError::invalid)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the dataset under `dir` and returns the files in write order.
pub fn write_demo(dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::file(dir, e))?;
    let mut written = Vec::new();
    let mut put = |rel: &str, bytes: &[u8]| -> CliResult {
        let path = dir.join(rel);
        write_file(&path, bytes)?;
        written.push(path);
        Ok(())
    };

    let features = demo_features();
    put("features.geojson", &pretty(&features)?)?;
    for (p, ann) in PHOTOS.iter().zip(demo_annotations()) {
        let id = lot_feature_id(p.lot);
        put(&format!("footprints/building-{id}.geojson"), &pretty(&lot_feature(&LOTS[p.lot]))?)?;
        put(&format!("annotations/facade-{id}.json"), &pretty(&ann)?)?;
    }

    let mut csv = String::from("px,py,lon,lat\n");
    for [px, py, lon, lat] in demo_control_points() {
        writeln!(csv, "{px},{py},{lon},{lat}").expect("writing to a String");
    }
    put("gcp.csv", csv.as_bytes())?;

    let params = toml::to_string(&ReconstructParams::default()).map_err(CliError::invalid)?;
    put("params.toml", params.as_bytes())?;

    let data_dir = dir.join("data");
    let server = format!(
        "host = \"127.0.0.1\"\nport = 8080\ndata_dir = {}\ncors_origins = [\"*\"]\n",
        toml::Value::String(data_dir.display().to_string())
    );
    put("server.toml", server.as_bytes())?;

    let scan_path = dir.join("scan.png");
    demo_scan().write_png(&scan_path).map_err(|e| CliError::file(&scan_path, e))?;
    written.push(scan_path);
    Ok(written)
}
