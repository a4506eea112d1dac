use std::io::Write;
use std::path::Path;

use timeatlas_core::geo::lonlat_to_mercator;
use timeatlas_core::georectify::{
    fit_inverse, fit_transform, parse_transform_kind, read_control_points, read_transform, residual_report,
    warp_raster, write_transform, OutputGrid, RasterImage, Resampling, TransformKind,
};
use timeatlas_core::{ControlPointPair, GeoPoint, MercatorBounds, Transform2D};

use crate::error::{read_file, write_file, CliError, CliResult};
use crate::{parse_bbox, WarpApplyArgs, WarpCommand};

pub fn run(cmd: WarpCommand, out: &mut dyn Write) -> CliResult {
    match cmd {
        WarpCommand::Fit { pairs, kind, out: dest } => {
            let (kind, degree) = parse_kind(&kind)?;
            let pairs = load_pairs(&pairs)?;
            let t = fit_transform(&pairs, kind, degree).map_err(CliError::invalid)?;
            let report = residual_report(&t, &pairs).map_err(CliError::invalid)?;
            log::info!("fitted {kind} transform on {} pairs, RMS {:.3} m", pairs.len(), report.rms);
            let mut json = Vec::new();
            write_transform(&mut json, &t).map_err(CliError::invalid)?;
            json.push(b'\n');
            match dest {
                Some(p) => write_file(&p, &json),
                None => Ok(out.write_all(&json)?),
            }
        }
        WarpCommand::Report { pairs, transform } => {
            let pairs = load_pairs(&pairs)?;
            let t = load_transform(&transform)?;
            let report = residual_report(&t, &pairs).map_err(CliError::invalid)?;
            for r in &report.per_pair {
                writeln!(out, "pair {}: {:.3} m", r.index, r.error)?;
            }
            writeln!(out, "RMS {:.3}", report.rms)?;
            Ok(())
        }
        WarpCommand::Apply(args) => apply(&args, out),
    }
}

fn parse_kind(raw: &str) -> CliResult<(TransformKind, u8)> {
    parse_transform_kind(raw).map_err(|e| CliError::Usage(e.to_string()))
}

fn load_pairs(path: &Path) -> CliResult<Vec<ControlPointPair>> {
    let bytes = read_file(path)?;
    read_control_points(bytes.as_slice()).map_err(|e| CliError::file(path, e))
}

fn load_transform(path: &Path) -> CliResult<Transform2D> {
    let bytes = read_file(path)?;
    read_transform(bytes.as_slice()).map_err(|e| CliError::file(path, e))
}

fn apply(a: &WarpApplyArgs, out: &mut dyn Write) -> CliResult {
    let resampling = match a.resampling.as_str() {
        "nearest" => Resampling::Nearest,
        "bilinear" => Resampling::Bilinear,
        other => return Err(CliError::Usage(format!("unknown resampling {other:?}; expected nearest or bilinear"))),
    };
    let img = RasterImage::read_png(&a.image).map_err(|e| CliError::file(&a.image, e))?;
    let (forward, inverse) = match (&a.transform, &a.pairs) {
        (Some(path), _) => {
            let t = load_transform(path)?;
            let inv = t
                .affine_inverse()
                .map_err(|e| CliError::file(path, format!("{e}; use --pairs for polynomial transforms")))?;
            (t, inv)
        }
        (None, Some(path)) => {
            let (kind, degree) = parse_kind(&a.kind)?;
            let pairs = load_pairs(path)?;
            let fwd = fit_transform(&pairs, kind, degree).map_err(CliError::invalid)?;
            let inv = fit_inverse(&pairs, kind, degree).map_err(CliError::invalid)?;
            (fwd, inv)
        }
        (None, None) => return Err(CliError::Usage("either --transform or --pairs is required".into())),
    };

    let bounds = match &a.bounds {
        Some(raw) => {
            let g = parse_bbox(raw)?;
            let lo = lonlat_to_mercator(GeoPoint::new(g.min_lon, g.min_lat)).map_err(CliError::invalid)?;
            let hi = lonlat_to_mercator(GeoPoint::new(g.max_lon, g.max_lat)).map_err(CliError::invalid)?;
            MercatorBounds::new(lo.x, lo.y, hi.x, hi.y)
        }
        None => image_footprint(&forward, &img)?,
    };
    let width = a.width.unwrap_or(img.width).max(1);
    let height = match a.height {
        Some(h) => h,
        None if bounds.width() > 0.0 => ((width as f64) * bounds.height() / bounds.width()).round().max(1.0) as u32,
        None => 1,
    };
    let grid = OutputGrid { bounds, width, height };
    let warped = warp_raster(&img, &inverse, &grid, resampling).map_err(CliError::invalid)?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::file(parent, e))?;
    }
    warped.write_png(&a.out).map_err(|e| CliError::file(&a.out, e))?;
    writeln!(
        out,
        "{} {}x{} mercator [{:.3}, {:.3}, {:.3}, {:.3}]",
        a.out.display(),
        width,
        height,
        bounds.min_x,
        bounds.min_y,
        bounds.max_x,
        bounds.max_y
    )?;
    Ok(())
}

/// Mercator bounding box of the image outline pushed through `t`.
fn image_footprint(t: &Transform2D, img: &RasterImage) -> CliResult<MercatorBounds> {
    let (w, h) = (img.width as f64, img.height as f64);
    let steps = 16;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..=steps {
        let s = i as f64 / steps as f64;
        for (u, v) in [(s * w, 0.0), (s * w, h), (0.0, s * h), (w, s * h)] {
            let (x, y) = t.eval(u, v);
            xs.push(x);
            ys.push(y);
        }
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let b = MercatorBounds::new(min(&xs), min(&ys), max(&xs), max(&ys));
    if !(b.width() > 0.0 && b.height() > 0.0) || !b.width().is_finite() || !b.height().is_finite() {
        return Err(CliError::invalid("transform maps the image to a degenerate area"));
    }
    Ok(b)
}
