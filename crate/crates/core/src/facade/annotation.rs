//! Annotation documents and the full per-photo pipeline.

use log::debug;
use serde::{Deserialize, Serialize};

use super::{
    apply_homography, estimate_vanishing_points, extract_params, rectifying_homography, regularize_grid, snap_to_grid,
    FacadeBox, FacadeError, FacadeGrid, FacadeLabel, FacadeParams, Homography, LineSegment,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealSize {
    pub width_m: f64,
    pub height_m: f64,
}

/// Ties a facade to one edge of a footprint ring (edge i runs from vertex
/// i to vertex i + 1 of the exterior).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLink {
    pub feature_id: u64,
    pub edge_index: usize,
}

/// `[x1, y1, x2, y2]` in pixels.
pub type Segment = [f64; 4];

/// Pixel rectangle of the facade itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub image: ImageSize,
    /// Defaults to the whole image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facade: Option<Region>,
    pub boxes: Vec<FacadeBox<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<EdgeLink>,
    /// When absent, segments are taken from the box edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<Segment>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_size: Option<RealSize>,
}

impl Annotation {
    pub fn from_json(text: &str) -> Result<Self, FacadeError> {
        let a: Annotation = serde_json::from_str(text)?;
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), FacadeError> {
        if !(self.image.width > 0.0 && self.image.height > 0.0) {
            return Err(FacadeError::Domain("image size must be positive".into()));
        }
        for (index, b) in self.boxes.iter().enumerate() {
            b.validate().map_err(|reason| FacadeError::InvalidBox { index, reason })?;
        }
        if let Some(f) = self.facade {
            if !(f.w > 0.0 && f.h > 0.0) {
                return Err(FacadeError::Domain("facade region has no area".into()));
            }
        }
        Ok(())
    }

    pub fn facade_box(&self) -> FacadeBox<f64> {
        let r = self.facade.unwrap_or(Region {
            x: 0.0,
            y: 0.0,
            w: self.image.width,
            h: self.image.height,
        });
        FacadeBox::new(FacadeLabel::Storefront, r.x, r.y, r.w, r.h)
    }

    pub fn line_segments(&self) -> Vec<LineSegment<f64>> {
        match &self.segments {
            Some(s) => s
                .iter()
                .filter_map(|s| LineSegment::new(s[0], s[1], s[2], s[3]).ok())
                .collect(),
            None => self
                .boxes
                .iter()
                .flat_map(|b| {
                    let c = b.corners();
                    (0..4).filter_map(move |i| LineSegment::new(c[i].x, c[i].y, c[(i + 1) % 4].x, c[(i + 1) % 4].y).ok())
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacadeResult {
    pub homography: Homography<f64>,
    pub facade: FacadeBox<f64>,
    pub grid: FacadeGrid<f64>,
    /// Non-window components after rectification and snapping.
    pub others: Vec<FacadeBox<f64>>,
    pub params: FacadeParams,
}

/// Rectifies, regularizes and measures one annotated facade. Falls back to
/// the identity when there are too few segments to find vanishing points.
pub fn process_annotation(ann: &Annotation, real: RealSize) -> Result<FacadeResult, FacadeError> {
    ann.validate()?;
    let homography = match estimate_vanishing_points(&ann.line_segments()) {
        Ok((vh, vv)) => rectifying_homography(&vh, &vv, ann.image.width, ann.image.height)?,
        Err(FacadeError::InsufficientData { class, got }) => {
            debug!("only {got} {class} segments; assuming a frontal photo");
            Homography::identity()
        }
        Err(e) => return Err(e),
    };
    let facade = apply_homography(&homography, &[ann.facade_box()])?[0];
    let rectified = apply_homography(&homography, &ann.boxes)?;
    let (windows, rest): (Vec<_>, Vec<_>) = rectified.into_iter().partition(|b| b.label == FacadeLabel::Window);
    let grid = regularize_grid(&windows);
    let others = snap_to_grid(&grid, &rest);
    let params = extract_params(&grid, &others, &facade, real.width_m, real.height_m)?;
    Ok(FacadeResult {
        homography,
        facade,
        grid,
        others,
        params,
    })
}
