//! Uniform grid over Mercator meters.

use std::collections::HashMap;

use crate::geo::{lonlat_to_mercator, GeoBounds, GeoPoint, MAX_LATITUDE_DEG};

/// Cell edge length, Mercator meters.
pub const CELL_SIZE_M: f64 = 256.0;
/// Items spanning more cells than this go to an always-checked list.
const MAX_CELLS_PER_ITEM: i64 = 4096;
/// Queries spanning more cells than this scan linearly instead.
const MAX_CELLS_PER_QUERY: i64 = 1 << 16;

type CellRange = (i64, i64, i64, i64);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridIndex {
    cells: HashMap<(i64, i64), Vec<u32>>,
    large: Vec<u32>,
    len: usize,
}

fn cell_range(b: &GeoBounds<f64>) -> CellRange {
    let clamp = |lat: f64| lat.clamp(-MAX_LATITUDE_DEG, MAX_LATITUDE_DEG);
    let project = |lon: f64, lat: f64| {
        lonlat_to_mercator(GeoPoint::new(lon.clamp(-180.0, 180.0), clamp(lat))).expect("clamped point projects")
    };
    let lo = project(b.min_lon, b.min_lat);
    let hi = project(b.max_lon, b.max_lat);
    let c = |v: f64| (v / CELL_SIZE_M).floor() as i64;
    (c(lo.x), c(lo.y), c(hi.x), c(hi.y))
}

fn cell_count(r: CellRange) -> i64 {
    (r.2 - r.0 + 1).saturating_mul(r.3 - r.1 + 1)
}

impl GridIndex {
    pub fn insert(&mut self, slot: u32, bounds: &GeoBounds<f64>) {
        self.len += 1;
        let r = cell_range(bounds);
        if cell_count(r) > MAX_CELLS_PER_ITEM {
            self.large.push(slot);
            return;
        }
        for cx in r.0..=r.2 {
            for cy in r.1..=r.3 {
                self.cells.entry((cx, cy)).or_default().push(slot);
            }
        }
    }

    /// Candidate slots whose cells touch `bounds`, sorted and deduplicated.
    /// `None` means the query is too large for the grid and the caller
    /// should scan everything.
    pub fn candidates(&self, bounds: &GeoBounds<f64>) -> Option<Vec<u32>> {
        let r = cell_range(bounds);
        let n = cell_count(r);
        if n > MAX_CELLS_PER_QUERY {
            return None;
        }
        let mut out = self.large.clone();
        if n as usize > self.cells.len() {
            // sparse grid: walk occupied cells instead of the query range
            for ((cx, cy), slots) in &self.cells {
                if (r.0..=r.2).contains(cx) && (r.1..=r.3).contains(cy) {
                    out.extend_from_slice(slots);
                }
            }
        } else {
            for cx in r.0..=r.2 {
                for cy in r.1..=r.3 {
                    if let Some(slots) = self.cells.get(&(cx, cy)) {
                        out.extend_from_slice(slots);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Some(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}
