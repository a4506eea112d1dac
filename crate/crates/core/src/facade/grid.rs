//! Row/column regularization of rectified window boxes.

use std::cmp::Ordering;

use super::{median, FacadeBox, FacadeLabel};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow<T> {
    pub y: T,
    pub height: T,
    /// Indices into [`FacadeGrid::boxes`].
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridColumn<T> {
    pub x: T,
    pub width: T,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridBox<T> {
    pub row: usize,
    pub col: usize,
    pub bbox: FacadeBox<T>,
}

/// Snapped windows ordered by row, then column. Rows ascend in y,
/// columns in x.
#[derive(Debug, Clone, PartialEq)]
pub struct FacadeGrid<T> {
    pub rows: Vec<GridRow<T>>,
    pub columns: Vec<GridColumn<T>>,
    pub boxes: Vec<GridBox<T>>,
}

impl<T> Default for FacadeGrid<T> {
    fn default() -> Self {
        Self {
            rows: Vec::new(),
            columns: Vec::new(),
            boxes: Vec::new(),
        }
    }
}

fn total_cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Groups values into clusters split wherever consecutive sorted values
/// differ by more than `gap`. Returns a cluster id per input, clusters
/// numbered in ascending order.
fn cluster_1d<T: Scalar>(values: &[T], gap: T) -> (Vec<usize>, usize) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| total_cmp(&values[a], &values[b]).then(a.cmp(&b)));
    let mut ids = vec![0; values.len()];
    let mut cluster = 0;
    for w in 0..order.len() {
        if w > 0 && values[order[w]] - values[order[w - 1]] > gap {
            cluster += 1;
        }
        ids[order[w]] = cluster;
    }
    (ids, if values.is_empty() { 0 } else { cluster + 1 })
}

/// Clusters window centers into rows (gap > half the median height) and
/// columns (gap > half the median width), then snaps each box's top and
/// height to its row medians and its left edge and width to its column
/// medians.
pub fn regularize_grid<T: Scalar>(boxes: &[FacadeBox<T>]) -> FacadeGrid<T> {
    if boxes.is_empty() {
        return FacadeGrid::default();
    }
    let half = T::lit(0.5);
    let heights: Vec<T> = boxes.iter().map(|b| b.h).collect();
    let widths: Vec<T> = boxes.iter().map(|b| b.w).collect();
    let cy: Vec<T> = boxes.iter().map(|b| b.center().y).collect();
    let cx: Vec<T> = boxes.iter().map(|b| b.center().x).collect();
    let (row_of, n_rows) = cluster_1d(&cy, median(&heights) * half);
    let (col_of, n_cols) = cluster_1d(&cx, median(&widths) * half);

    let stats = |ids: &[usize], n: usize, pos: &dyn Fn(&FacadeBox<T>) -> T, size: &dyn Fn(&FacadeBox<T>) -> T| {
        (0..n)
            .map(|k| {
                let members: Vec<&FacadeBox<T>> = boxes.iter().zip(ids).filter(|(_, &i)| i == k).map(|(b, _)| b).collect();
                let p: Vec<T> = members.iter().map(|b| pos(b)).collect();
                let s: Vec<T> = members.iter().map(|b| size(b)).collect();
                (median(&p), median(&s))
            })
            .collect::<Vec<(T, T)>>()
    };
    let row_stats = stats(&row_of, n_rows, &|b| b.y, &|b| b.h);
    let col_stats = stats(&col_of, n_cols, &|b| b.x, &|b| b.w);

    let mut cells: Vec<(usize, usize, &FacadeBox<T>)> =
        boxes.iter().enumerate().map(|(i, b)| (row_of[i], col_of[i], b)).collect();
    // ties inside one cell are broken on the original geometry so input
    // order never matters
    cells.sort_by(|a, b| {
        (a.0, a.1)
            .cmp(&(b.0, b.1))
            .then_with(|| total_cmp(&a.2.y, &b.2.y))
            .then_with(|| total_cmp(&a.2.x, &b.2.x))
            .then_with(|| total_cmp(&a.2.h, &b.2.h))
            .then_with(|| total_cmp(&a.2.w, &b.2.w))
            .then_with(|| total_cmp(&a.2.confidence, &b.2.confidence))
    });

    let mut grid = FacadeGrid {
        rows: row_stats
            .iter()
            .map(|&(y, height)| GridRow {
                y,
                height,
                members: Vec::new(),
            })
            .collect(),
        columns: col_stats
            .iter()
            .map(|&(x, width)| GridColumn {
                x,
                width,
                members: Vec::new(),
            })
            .collect(),
        boxes: Vec::with_capacity(boxes.len()),
    };
    for (i, (r, c, b)) in cells.into_iter().enumerate() {
        grid.rows[r].members.push(i);
        grid.columns[c].members.push(i);
        grid.boxes.push(GridBox {
            row: r,
            col: c,
            bbox: FacadeBox {
                label: b.label,
                x: col_stats[c].0,
                y: row_stats[r].0,
                w: col_stats[c].1,
                h: row_stats[r].1,
                confidence: b.confidence,
            },
        });
    }
    grid
}

/// Aligns sills and cornices to the window grid: a sill sits directly under
/// its nearest row and takes its nearest column's span; a cornice sits
/// directly above its nearest row. Other labels pass through unchanged.
pub fn snap_to_grid<T: Scalar>(grid: &FacadeGrid<T>, boxes: &[FacadeBox<T>]) -> Vec<FacadeBox<T>> {
    let nearest = |key: T, items: &mut dyn Iterator<Item = T>| -> Option<usize> {
        items
            .enumerate()
            .min_by(|a, b| total_cmp(&(a.1 - key).abs(), &(b.1 - key).abs()))
            .map(|(i, _)| i)
    };
    boxes
        .iter()
        .map(|b| {
            let mut out = *b;
            match b.label {
                FacadeLabel::WindowSill => {
                    if let Some(r) = nearest(b.y, &mut grid.rows.iter().map(|r| r.y + r.height)) {
                        out.y = grid.rows[r].y + grid.rows[r].height;
                    }
                    if let Some(c) = nearest(b.center().x, &mut grid.columns.iter().map(|c| c.x + c.width * T::lit(0.5))) {
                        out.x = grid.columns[c].x;
                        out.w = grid.columns[c].width;
                    }
                }
                FacadeLabel::Cornice => {
                    if let Some(r) = nearest(b.bottom(), &mut grid.rows.iter().map(|r| r.y)) {
                        out.y = grid.rows[r].y - b.h;
                    }
                }
                _ => {}
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(x: f64, y: f64, w: f64, h: f64) -> FacadeBox<f64> {
        FacadeBox::new(FacadeLabel::Window, x, y, w, h)
    }

    #[test]
    fn single_box() {
        let g = regularize_grid(&[win(3.0, 4.0, 5.0, 6.0)]);
        assert_eq!(g.rows.len(), 1);
        assert_eq!(g.columns.len(), 1);
        assert_eq!(g.boxes[0].bbox, win(3.0, 4.0, 5.0, 6.0));
    }

    #[test]
    fn exact_grid_is_fixed_point() {
        let mut boxes = Vec::new();
        for r in 0..3 {
            for c in 0..4 {
                boxes.push(win(100.0 + 150.0 * c as f64, 50.0 + 200.0 * r as f64, 60.0, 120.0));
            }
        }
        let g = regularize_grid(&boxes);
        assert_eq!((g.rows.len(), g.columns.len()), (3, 4));
        let out: Vec<_> = g.boxes.iter().map(|b| b.bbox).collect();
        assert_eq!(out, boxes);
        assert_eq!(regularize_grid(&out), g);
    }

    #[test]
    fn sills_and_cornices_snap() {
        let g = regularize_grid(&[win(10.0, 10.0, 20.0, 30.0), win(50.0, 10.0, 20.0, 30.0)]);
        let sill = FacadeBox::new(FacadeLabel::WindowSill, 48.0, 42.0, 25.0, 3.0);
        let cornice = FacadeBox::new(FacadeLabel::Cornice, 0.0, 2.0, 100.0, 5.0);
        let out = snap_to_grid(&g, &[sill, cornice]);
        assert_eq!((out[0].x, out[0].y, out[0].w), (50.0, 40.0, 20.0));
        assert_eq!(out[1].y, 5.0);
    }
}
