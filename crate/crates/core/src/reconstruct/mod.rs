//! Building reconstruction: footprint extrusion, procedural facade
//! components, mesh assembly and GLB export.
//!
//! Meshes live in a local z-up frame in meters, centered on the footprint
//! centroid; the centroid's Mercator position is kept as the anchor so
//! float32 export does not lose precision.

mod assemble;
mod components;
mod footprint;
mod glb;
mod mesh;

pub use assemble::{assemble_building, FacadePlacement};
pub use components::{generate_component, ComponentKind};
pub use footprint::{extrude_footprint, facade_to_world, FacadeFrame, Footprint, LocalFootprint};
pub use glb::{export_gltf, parse_glb, GlbDocument};
pub use mesh::{Mesh, MeshGroup};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ReconstructError {
    #[error("invalid footprint: {0}")]
    Geometry(String),
    #[error("{0}")]
    Domain(String),
    #[error("invalid metadata: {0}")]
    Validation(String),
    #[error("unsupported component kind {0:?}")]
    UnsupportedKind(String),
    #[error("{context}: {source}")]
    Component {
        context: String,
        #[source]
        source: Box<ReconstructError>,
    },
    #[error("invalid GLB: {0}")]
    Glb(String),
}

/// Tunables for extrusion and component generation, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructParams {
    pub floor_height: f64,
    pub default_floors: u32,
    pub window_recess: f64,
    pub sill_protrusion: f64,
    pub cornice_protrusion: f64,
    pub stair_rise: f64,
    pub stair_run: f64,
}

impl Default for ReconstructParams {
    fn default() -> Self {
        Self {
            floor_height: 3.0,
            default_floors: 2,
            window_recess: 0.12,
            sill_protrusion: 0.05,
            cornice_protrusion: 0.25,
            stair_rise: 0.18,
            stair_run: 0.28,
        }
    }
}

impl ReconstructParams {
    pub fn validate(&self) -> Result<(), ReconstructError> {
        let checks = [
            ("floor_height", self.floor_height),
            ("default_floors", self.default_floors as f64),
            ("window_recess", self.window_recess),
            ("sill_protrusion", self.sill_protrusion),
            ("cornice_protrusion", self.cornice_protrusion),
            ("stair_rise", self.stair_rise),
            ("stair_run", self.stair_run),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ReconstructError::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Extrusion height: `height_m`, else `floors * floor_height`, else the
/// default floor count.
pub fn building_height(props: &BTreeMap<String, String>, params: &ReconstructParams) -> Result<f64, ReconstructError> {
    if let Some(h) = props.get("height_m") {
        let v: f64 = h
            .trim()
            .parse()
            .map_err(|_| ReconstructError::Validation(format!("height_m {h:?} is not a number")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(ReconstructError::Validation(format!("height_m must be positive, got {v}")));
        }
        return Ok(v);
    }
    if let Some(f) = props.get("floors") {
        let n: i64 = f
            .trim()
            .parse()
            .map_err(|_| ReconstructError::Validation(format!("floors {f:?} is not an integer")))?;
        if n < 1 {
            return Err(ReconstructError::Validation(format!("floors must be at least 1, got {n}")));
        }
        return Ok(n as f64 * params.floor_height);
    }
    Ok(params.default_floors as f64 * params.floor_height)
}
