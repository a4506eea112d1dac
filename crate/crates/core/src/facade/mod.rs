//! Facade rectification and regularization.
//!
//! Input is an annotated photo: axis-aligned component boxes plus optional
//! line segments. Vanishing points give a homography to a frontal view,
//! windows are snapped to a row/column grid, and the grid is measured into
//! [`FacadeParams`] for procedural reconstruction.

mod annotation;
mod grid;
mod homography;
mod params;
mod vanishing;

pub use annotation::{process_annotation, Annotation, EdgeLink, FacadeResult, ImageSize, RealSize, Region, Segment};
pub use grid::{regularize_grid, snap_to_grid, FacadeGrid, GridBox, GridColumn, GridRow};
pub use homography::{apply_homography, rectifying_homography, Homography};
pub use params::{extract_params, ElementParams, FacadeParams, RowParams};
pub use vanishing::{estimate_vanishing_points, LineSegment, VanishingPoint, RANSAC_ITERATIONS, RANSAC_SEED, RANSAC_THRESHOLD_DEG};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::polygon::Point2;
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum FacadeError {
    #[error("need at least 2 {class} segments, got {got}")]
    InsufficientData { class: &'static str, got: usize },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("box {index} ({label}) projects to infinity")]
    Projection { index: usize, label: FacadeLabel },
    #[error("{0}")]
    Domain(String),
    #[error("invalid box {index}: {reason}")]
    InvalidBox { index: usize, reason: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Component classes a facade parser can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacadeLabel {
    Window,
    WindowSill,
    Cornice,
    RoofCornice,
    Storefront,
    Entry,
    Stair,
}

impl FacadeLabel {
    pub const ALL: [FacadeLabel; 7] = [
        FacadeLabel::Window,
        FacadeLabel::WindowSill,
        FacadeLabel::Cornice,
        FacadeLabel::RoofCornice,
        FacadeLabel::Storefront,
        FacadeLabel::Entry,
        FacadeLabel::Stair,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FacadeLabel::Window => "window",
            FacadeLabel::WindowSill => "window_sill",
            FacadeLabel::Cornice => "cornice",
            FacadeLabel::RoofCornice => "roof_cornice",
            FacadeLabel::Storefront => "storefront",
            FacadeLabel::Entry => "entry",
            FacadeLabel::Stair => "stair",
        }
    }
}

impl fmt::Display for FacadeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FacadeLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FacadeLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown facade label {s:?}"))
    }
}

/// Axis-aligned box in image pixels; `(x, y)` is the top-left corner and
/// y grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct FacadeBox<T> {
    pub label: FacadeLabel,
    pub x: T,
    pub y: T,
    pub w: T,
    pub h: T,
    #[serde(default = "full_confidence")]
    pub confidence: T,
}

fn full_confidence<T: Scalar>() -> T {
    T::one()
}

impl<T: Scalar> FacadeBox<T> {
    pub fn new(label: FacadeLabel, x: T, y: T, w: T, h: T) -> Self {
        Self {
            label,
            x,
            y,
            w,
            h,
            confidence: T::one(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let vals = [self.x, self.y, self.w, self.h, self.confidence];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err("non-finite coordinate".into());
        }
        if self.w <= T::zero() || self.h <= T::zero() {
            return Err(format!("non-positive size {}x{}", self.w, self.h));
        }
        if self.confidence < T::zero() || self.confidence > T::one() {
            return Err(format!("confidence {} outside [0, 1]", self.confidence));
        }
        Ok(())
    }

    pub fn center(&self) -> Point2<T> {
        let half = T::lit(0.5);
        Point2::new(self.x + self.w * half, self.y + self.h * half)
    }

    pub fn right(&self) -> T {
        self.x + self.w
    }

    pub fn bottom(&self) -> T {
        self.y + self.h
    }

    /// Corners clockwise from top-left.
    pub fn corners(&self) -> [Point2<T>; 4] {
        [
            Point2::new(self.x, self.y),
            Point2::new(self.right(), self.y),
            Point2::new(self.right(), self.bottom()),
            Point2::new(self.x, self.bottom()),
        ]
    }
}

/// Median of a non-empty slice (mean of the middle pair for even counts).
pub(crate) fn median<T: Scalar>(values: &[T]) -> T {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) * T::lit(0.5)
    }
}
