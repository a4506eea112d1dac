use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::fit::ControlPointPair;
use super::transform::Transform2D;
use super::GeorectifyError;

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    px: f64,
    py: f64,
    lon: f64,
    lat: f64,
}

/// Reads `px,py,lon,lat` CSV.
pub fn read_control_points<R: Read>(reader: R) -> Result<Vec<ControlPointPair<f64>>, GeorectifyError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["px", "py", "lon", "lat"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(GeorectifyError::InvalidPair {
            index: 0,
            reason: format!("expected header px,py,lon,lat, found {}", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    rdr.deserialize()
        .map(|row| {
            let r: CsvRow = row?;
            Ok(ControlPointPair::new(r.px, r.py, r.lon, r.lat))
        })
        .collect()
}

pub fn write_control_points<W: Write>(writer: W, pairs: &[ControlPointPair<f64>]) -> Result<(), GeorectifyError> {
    let mut w = csv::Writer::from_writer(writer);
    for p in pairs {
        w.serialize(CsvRow {
            px: p.source.x,
            py: p.source.y,
            lon: p.target.lon,
            lat: p.target.lat,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// `{kind, degree, coeffs_x, coeffs_y}` JSON; shortest round-trip float text.
pub fn write_transform<W: Write>(writer: W, t: &Transform2D<f64>) -> Result<(), GeorectifyError> {
    serde_json::to_writer_pretty(writer, t)?;
    Ok(())
}

pub fn read_transform<R: Read>(reader: R) -> Result<Transform2D<f64>, GeorectifyError> {
    let t: Transform2D<f64> = serde_json::from_reader(reader)?;
    t.validate()?;
    Ok(t)
}
