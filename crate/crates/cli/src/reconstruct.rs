use std::io::Write;
use std::path::Path;

use timeatlas_core::facade::{process_annotation, Annotation, RealSize};
use timeatlas_core::reconstruct::{
    assemble_building, building_height, export_gltf, FacadePlacement, Footprint, ReconstructParams,
};
use timeatlas_core::store::{parse_documents, Feature};

use crate::error::{read_file, read_json, write_file, CliError, CliResult};
use crate::ReconstructArgs;

pub fn run(a: &ReconstructArgs, out: &mut dyn Write) -> CliResult {
    let params = load_params(a.params.as_deref())?;
    let feature = load_footprint(&a.footprint)?;
    let footprint = Footprint::from_feature(&feature).map_err(|e| CliError::file(&a.footprint, e))?;
    let height = match a.height {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(CliError::Usage(format!("--height must be positive, got {h}"))),
        None => building_height(&feature.properties, &params).map_err(|e| CliError::file(&a.footprint, e))?,
    };
    let local = footprint.to_local().map_err(|e| CliError::file(&a.footprint, e))?;

    let mut placements = Vec::with_capacity(a.annotations.len());
    for path in &a.annotations {
        let text = String::from_utf8(read_file(path)?).map_err(|e| CliError::file(path, e))?;
        let ann = Annotation::from_json(&text).map_err(|e| CliError::file(path, e))?;
        let edge = ann
            .link
            .map(|l| l.edge_index)
            .ok_or_else(|| CliError::file(path, "annotation has no link.edge_index"))?;
        let (p, q) = local.edge(edge).ok_or_else(|| {
            CliError::file(path, format!("edge {edge} out of range; footprint has {} edges", local.edge_count()))
        })?;
        // facade rectangles span the whole wall unless told otherwise
        let real = ann.real_size.unwrap_or(RealSize {
            width_m: q.sub(p).norm(),
            height_m: height,
        });
        let result = process_annotation(&ann, real).map_err(|e| CliError::file(path, e))?;
        log::info!(
            "{}: {} rows x {} columns on edge {edge}",
            path.display(),
            result.params.n_rows,
            result.params.n_cols
        );
        placements.push(FacadePlacement {
            edge,
            params: result.params,
        });
    }

    let mesh = assemble_building(&footprint, height, &placements, &params).map_err(CliError::invalid)?;
    let glb = export_gltf(&mesh).map_err(CliError::invalid)?;
    write_file(&a.out, &glb)?;
    writeln!(
        out,
        "{}: {} primitives, {} triangles, {} bytes",
        a.out.display(),
        mesh.groups.len(),
        mesh.triangles.len(),
        glb.len()
    )?;
    Ok(())
}

fn load_params(path: Option<&Path>) -> CliResult<ReconstructParams> {
    let Some(path) = path else {
        return Ok(ReconstructParams::default());
    };
    let text = String::from_utf8(read_file(path)?).map_err(|e| CliError::file(path, e))?;
    let params: ReconstructParams = toml::from_str(&text).map_err(|e| CliError::file(path, e))?;
    params.validate().map_err(|e| CliError::file(path, e))?;
    Ok(params)
}

/// Exactly one GeoJSON polygon document.
fn load_footprint(path: &Path) -> CliResult<Feature> {
    let doc = read_json(path)?;
    let drafts = parse_documents(&doc).map_err(|errs| {
        let list: Vec<String> = errs.iter().map(ToString::to_string).collect();
        CliError::file(path, list.join("; "))
    })?;
    match <[_; 1]>::try_from(drafts) {
        Ok([d]) => Ok(d.with_id(0)),
        Err(v) => Err(CliError::file(path, format!("expected one footprint, found {}", v.len()))),
    }
}
