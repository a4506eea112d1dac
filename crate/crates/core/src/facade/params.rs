//! Procedural parameters measured from a regularized grid.

use serde::{Deserialize, Serialize};

use super::{median, FacadeBox, FacadeError, FacadeGrid, FacadeLabel};

/// Window row, measured in meters from the facade's bottom edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowParams {
    pub bottom_m: f64,
    pub window_width_m: f64,
    pub window_height_m: f64,
    /// Window width / height.
    pub ratio: f64,
    /// Occupied column indices, ascending.
    pub columns: Vec<usize>,
}

/// Any non-window component (entry, stair, sill, cornice, storefront).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementParams {
    pub label: FacadeLabel,
    /// Horizontal center as a fraction of facade width.
    pub center_u: f64,
    pub bottom_m: f64,
    pub width_m: f64,
    pub height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacadeParams {
    pub width_m: f64,
    pub height_m: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    /// Top row first, as in the image.
    pub rows: Vec<RowParams>,
    /// Column centers as fractions of facade width, strictly increasing.
    pub column_centers: Vec<f64>,
    pub elements: Vec<ElementParams>,
}

/// Scales pixel measurements by `real / facade` size. `facade` is the
/// facade's pixel rectangle in the rectified frame (label ignored).
pub fn extract_params(
    grid: &FacadeGrid<f64>,
    others: &[FacadeBox<f64>],
    facade: &FacadeBox<f64>,
    width_m: f64,
    height_m: f64,
) -> Result<FacadeParams, FacadeError> {
    if !(facade.w > 0.0 && facade.h > 0.0) || !facade.w.is_finite() || !facade.h.is_finite() {
        return Err(FacadeError::Domain(format!("facade box {}x{} px has no area", facade.w, facade.h)));
    }
    if !(width_m > 0.0 && height_m > 0.0) || !width_m.is_finite() || !height_m.is_finite() {
        return Err(FacadeError::Domain(format!("facade size {width_m} x {height_m} m must be positive")));
    }
    let sx = width_m / facade.w;
    let sy = height_m / facade.h;
    let ground = facade.bottom();

    let rows = grid
        .rows
        .iter()
        .map(|r| {
            let widths: Vec<f64> = r.members.iter().map(|&i| grid.boxes[i].bbox.w).collect();
            let mut columns: Vec<usize> = r.members.iter().map(|&i| grid.boxes[i].col).collect();
            columns.sort_unstable();
            columns.dedup();
            let w = median(&widths);
            RowParams {
                bottom_m: (ground - (r.y + r.height)) * sy,
                window_width_m: w * sx,
                window_height_m: r.height * sy,
                ratio: (w * sx) / (r.height * sy),
                columns,
            }
        })
        .collect();

    let column_centers: Vec<f64> = grid
        .columns
        .iter()
        .map(|c| ((c.x + c.width * 0.5 - facade.x) / facade.w).clamp(0.0, 1.0))
        .collect();
    if column_centers.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FacadeError::Degenerate("window columns overlap after snapping".into()));
    }

    let mut elements: Vec<ElementParams> = others
        .iter()
        .filter(|b| b.label != FacadeLabel::Window)
        .map(|b| ElementParams {
            label: b.label,
            center_u: ((b.center().x - facade.x) / facade.w).clamp(0.0, 1.0),
            bottom_m: (ground - b.bottom()) * sy,
            width_m: b.w * sx,
            height_m: b.h * sy,
        })
        .collect();
    elements.sort_by(|a, b| {
        (a.label, a.center_u, a.bottom_m)
            .partial_cmp(&(b.label, b.center_u, b.bottom_m))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    Ok(FacadeParams {
        width_m,
        height_m,
        n_rows: grid.rows.len(),
        n_cols: grid.columns.len(),
        rows,
        column_centers,
        elements,
    })
}
