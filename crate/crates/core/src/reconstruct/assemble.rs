//! Places procedural components on the walls of an extruded footprint.

use serde::{Deserialize, Serialize};

use super::components::{generate_component, ComponentKind};
use super::footprint::{extrude_local, facade_to_world, FacadeFrame, Footprint};
use super::mesh::Mesh;
use super::{ReconstructError, ReconstructParams};
use crate::facade::FacadeParams;

/// Facade parameters attached to one exterior edge of the footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacadePlacement {
    pub edge: usize,
    pub params: FacadeParams,
}

/// Clamps `[x0, x0 + w] x [y0, y0 + h]` to the facade rectangle. Returns
/// `None` when nothing is left.
fn clamp_to_face(tag: &str, x0: f64, y0: f64, w: f64, h: f64, fw: f64, fh: f64) -> Option<(f64, f64, f64, f64)> {
    let cx0 = x0.max(0.0);
    let cy0 = y0.max(0.0);
    let cx1 = (x0 + w).min(fw);
    let cy1 = (y0 + h).min(fh);
    if cx0 != x0 || cy0 != y0 || cx1 != x0 + w || cy1 != y0 + h {
        log::warn!("{tag} extends past its facade and was clamped");
    }
    if cx1 - cx0 <= 1e-9 || cy1 - cy0 <= 1e-9 {
        log::warn!("{tag} lies outside its facade and was dropped");
        return None;
    }
    Some((cx0, cy0, cx1 - cx0, cy1 - cy0))
}

#[allow(clippy::too_many_arguments)]
fn place(
    mesh: &mut Mesh,
    frame: &FacadeFrame,
    fp: &FacadeParams,
    kind: ComponentKind,
    tag: String,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    params: &ReconstructParams,
) -> Result<(), ReconstructError> {
    let Some((x0, y0, w, h)) = clamp_to_face(&tag, x0, y0, w, h, fp.width_m, fp.height_m) else {
        return Ok(());
    };
    let part = generate_component(kind, w, h, params).map_err(|e| ReconstructError::Component {
        context: tag.clone(),
        source: Box::new(e),
    })?;
    mesh.append_mapped(&part, &tag, |v| frame.apply_depth(x0 + v[0], y0 + v[1], v[2]));
    Ok(())
}

/// Extrudes `fp` to height `h` and decorates the listed facades. Each
/// facade rectangle is stretched over its whole wall; components keep the
/// footprint's local frame and anchor.
pub fn assemble_building(
    fp: &Footprint,
    h: f64,
    facades: &[FacadePlacement],
    params: &ReconstructParams,
) -> Result<Mesh, ReconstructError> {
    params.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(ReconstructError::Domain(format!("extrusion height must be positive, got {h}")));
    }
    let local = fp.to_local()?;
    let mut mesh = extrude_local(&local, h);

    let mut order: Vec<&FacadePlacement> = facades.iter().collect();
    order.sort_by_key(|f| f.edge);
    for pair in order.windows(2) {
        if pair[0].edge == pair[1].edge {
            return Err(ReconstructError::Validation(format!("edge {} has more than one facade", pair[0].edge)));
        }
    }

    for fac in order {
        let p = &fac.params;
        let frame = facade_to_world(p.width_m, p.height_m, fac.edge, &local, h)?;
        for (r, row) in p.rows.iter().enumerate() {
            for &c in &row.columns {
                let cu = *p.column_centers.get(c).ok_or_else(|| {
                    ReconstructError::Validation(format!("row {r} references missing column {c}"))
                })?;
                let x0 = cu * p.width_m - row.window_width_m / 2.0;
                place(
                    &mut mesh,
                    &frame,
                    p,
                    ComponentKind::Window,
                    format!("window:e{}:r{r}:c{c}", fac.edge),
                    x0,
                    row.bottom_m,
                    row.window_width_m,
                    row.window_height_m,
                    params,
                )?;
            }
        }
        for (k, el) in p.elements.iter().enumerate() {
            let kind = ComponentKind::from(el.label);
            let x0 = el.center_u * p.width_m - el.width_m / 2.0;
            place(
                &mut mesh,
                &frame,
                p,
                kind,
                format!("{kind}:e{}:{k}", fac.edge),
                x0,
                el.bottom_m,
                el.width_m,
                el.height_m,
                params,
            )?;
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facade::{ElementParams, FacadeLabel, RowParams};
    use crate::reconstruct::footprint::tests::merc_footprint;

    fn facade() -> FacadeParams {
        FacadeParams {
            width_m: 10.0,
            height_m: 6.0,
            n_rows: 1,
            n_cols: 2,
            rows: vec![RowParams {
                bottom_m: 3.5,
                window_width_m: 1.0,
                window_height_m: 1.5,
                ratio: 1.0 / 1.5,
                columns: vec![0, 1],
            }],
            column_centers: vec![0.25, 0.75],
            elements: vec![ElementParams {
                label: FacadeLabel::Entry,
                center_u: 0.5,
                bottom_m: 0.0,
                width_m: 1.2,
                height_m: 2.4,
            }],
        }
    }

    #[test]
    fn windows_land_on_the_wall() {
        let fp = merc_footprint((0.0, 0.0), &[(0.0, 0.0), (10.0, 0.0), (10.0, 8.0), (0.0, 8.0)]);
        let m = assemble_building(&fp, 6.0, &[FacadePlacement { edge: 0, params: facade() }], &ReconstructParams::default())
            .unwrap();
        let tags: Vec<&str> = m.groups.iter().map(|g| g.tag.as_str()).collect();
        assert_eq!(tags, ["extrusion", "window:e0:r0:c0", "window:e0:r0:c1", "entry:e0:0"]);
        // edge 0 is the south wall at local y = -4; windows span x in [-3.0, -2.0] around 0.25 * 10 - 5
        let g = &m.groups[1];
        let vs = &m.vertices[g.vertices.clone()];
        let xmin = vs.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let xmax = vs.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
        let ymin = vs.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
        let zmin = vs.iter().map(|v| v[2]).fold(f64::INFINITY, f64::min);
        assert!((xmin + 3.0).abs() < 1e-7 && (xmax + 2.0).abs() < 1e-7);
        assert!((ymin + 4.0).abs() < 1e-7, "frame sits on the wall plane");
        assert!((zmin - 3.5).abs() < 1e-7);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn oversized_components_are_clamped() {
        let fp = merc_footprint((0.0, 0.0), &[(0.0, 0.0), (10.0, 0.0), (10.0, 8.0), (0.0, 8.0)]);
        let mut f = facade();
        f.elements[0].center_u = 0.99;
        f.rows[0].bottom_m = 5.0;
        let m = assemble_building(&fp, 6.0, &[FacadePlacement { edge: 0, params: f }], &ReconstructParams::default())
            .unwrap();
        for v in &m.vertices {
            assert!(v[0] <= 5.0 + 1e-7 && v[2] <= 6.0 + 1e-7);
        }
    }

    #[test]
    fn bad_placements() {
        let fp = merc_footprint((0.0, 0.0), &[(0.0, 0.0), (10.0, 0.0), (10.0, 8.0), (0.0, 8.0)]);
        let p = ReconstructParams::default();
        assert!(assemble_building(&fp, 6.0, &[FacadePlacement { edge: 7, params: facade() }], &p).is_err());
        let twice = [FacadePlacement { edge: 1, params: facade() }, FacadePlacement { edge: 1, params: facade() }];
        assert!(assemble_building(&fp, 6.0, &twice, &p).is_err());
        let mut f = facade();
        f.rows[0].columns.push(5);
        assert!(assemble_building(&fp, 6.0, &[FacadePlacement { edge: 0, params: f }], &p).is_err());
    }
}
