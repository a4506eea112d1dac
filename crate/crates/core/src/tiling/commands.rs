//! MVT geometry command streams.

use super::TilingError;
use super::GeomType;

pub const CMD_MOVE_TO: u32 = 1;
pub const CMD_LINE_TO: u32 = 2;
pub const CMD_CLOSE_PATH: u32 = 7;

/// Largest count representable in a command integer.
const MAX_COUNT: u32 = (1 << 29) - 1;

#[inline]
pub fn zigzag(n: i64) -> u64 {
    ((n << 1) ^ (n >> 63)) as u64
}

#[inline]
pub fn unzigzag(z: u64) -> i64 {
    ((z >> 1) as i64) ^ -((z & 1) as i64)
}

#[inline]
pub fn command(id: u32, count: u32) -> u32 {
    (id & 0x7) | (count << 3)
}

/// Tile-local integer path, y pointing down.
pub type Path = Vec<[i32; 2]>;

struct Encoder {
    out: Vec<u32>,
    cursor: [i64; 2],
}

impl Encoder {
    fn cmd(&mut self, id: u32, count: usize) -> Result<(), TilingError> {
        if count == 0 {
            return Err(TilingError::Encode(format!("command {id} with count 0")));
        }
        if count > MAX_COUNT as usize {
            return Err(TilingError::Encode(format!("command count {count} too large")));
        }
        self.out.push(command(id, count as u32));
        Ok(())
    }

    fn point(&mut self, p: [i32; 2]) {
        let (x, y) = (p[0] as i64, p[1] as i64);
        self.out.push(zigzag(x - self.cursor[0]) as u32);
        self.out.push(zigzag(y - self.cursor[1]) as u32);
        self.cursor = [x, y];
    }
}

/// Encodes quantized paths into a command stream.
///
/// Points: one `MoveTo` carrying every point. Lines: `MoveTo(1)` then
/// `LineTo(n-1)` per path. Polygons: as lines plus `ClosePath`; rings are
/// given without the closing vertex.
pub fn encode_commands(paths: &[Path], geom_type: GeomType) -> Result<Vec<u32>, TilingError> {
    let mut e = Encoder {
        out: Vec::new(),
        cursor: [0, 0],
    };
    match geom_type {
        GeomType::Point => {
            let pts: Vec<[i32; 2]> = paths.iter().flatten().copied().collect();
            e.cmd(CMD_MOVE_TO, pts.len())?;
            for p in pts {
                e.point(p);
            }
        }
        GeomType::LineString | GeomType::Polygon => {
            if paths.is_empty() {
                return Err(TilingError::Encode("geometry has no paths".into()));
            }
            for path in paths {
                if geom_type == GeomType::Polygon && path.len() < 3 {
                    return Err(TilingError::Encode(format!("polygon ring with {} vertices", path.len())));
                }
                let Some((first, rest)) = path.split_first() else {
                    return Err(TilingError::Encode("empty path".into()));
                };
                e.cmd(CMD_MOVE_TO, 1)?;
                e.point(*first);
                e.cmd(CMD_LINE_TO, rest.len())?;
                for p in rest {
                    e.point(*p);
                }
                if geom_type == GeomType::Polygon {
                    e.cmd(CMD_CLOSE_PATH, 1)?;
                }
            }
        }
        GeomType::Unknown => return Err(TilingError::Encode("cannot encode unknown geometry type".into())),
    }
    Ok(e.out)
}

/// Decodes a command stream back into paths, validating the grammar for
/// the geometry type. Each decoded point becomes its own single-vertex path.
pub fn decode_commands(cmds: &[u32], geom_type: GeomType) -> Result<Vec<Path>, TilingError> {
    let err = |i: usize, m: String| TilingError::Geometry { index: i, message: m };
    let mut paths: Vec<Path> = Vec::new();
    let mut cursor = [0i64; 2];
    let mut i = 0;
    let mut read_point = |i: &mut usize| -> Result<[i32; 2], TilingError> {
        if *i + 1 >= cmds.len() {
            return Err(err(*i, "command parameters truncated".into()));
        }
        let dx = unzigzag(cmds[*i] as u64);
        let dy = unzigzag(cmds[*i + 1] as u64);
        *i += 2;
        cursor = [cursor[0] + dx, cursor[1] + dy];
        let x = i32::try_from(cursor[0]).map_err(|_| err(*i, "coordinate overflows i32".into()))?;
        let y = i32::try_from(cursor[1]).map_err(|_| err(*i, "coordinate overflows i32".into()))?;
        Ok([x, y])
    };
    while i < cmds.len() {
        let at = i;
        let (id, count) = (cmds[i] & 0x7, (cmds[i] >> 3) as usize);
        i += 1;
        match (geom_type, id) {
            (GeomType::Point, CMD_MOVE_TO) => {
                if count == 0 {
                    return Err(err(at, "MoveTo with count 0".into()));
                }
                for _ in 0..count {
                    paths.push(vec![read_point(&mut i)?]);
                }
            }
            (GeomType::LineString | GeomType::Polygon, CMD_MOVE_TO) => {
                if count != 1 {
                    return Err(err(at, format!("MoveTo count {count}, expected 1")));
                }
                let p = read_point(&mut i)?;
                paths.push(vec![p]);
                if i >= cmds.len() || cmds[i] & 0x7 != CMD_LINE_TO {
                    return Err(err(i, "MoveTo must be followed by LineTo".into()));
                }
            }
            (GeomType::LineString | GeomType::Polygon, CMD_LINE_TO) => {
                if count == 0 {
                    return Err(err(at, "LineTo with count 0".into()));
                }
                let Some(path) = paths.last_mut() else {
                    return Err(err(at, "LineTo before MoveTo".into()));
                };
                if path.len() != 1 {
                    return Err(err(at, "LineTo must directly follow MoveTo".into()));
                }
                for _ in 0..count {
                    let p = read_point(&mut i)?;
                    paths.last_mut().expect("path exists").push(p);
                }
                if geom_type == GeomType::Polygon {
                    if i >= cmds.len() || cmds[i] != command(CMD_CLOSE_PATH, 1) {
                        return Err(err(i, "polygon ring must end with ClosePath(1)".into()));
                    }
                    if paths.last().is_some_and(|p| p.len() < 3) {
                        return Err(err(at, "polygon ring with fewer than 3 vertices".into()));
                    }
                }
            }
            (GeomType::Polygon, CMD_CLOSE_PATH) => {
                if count != 1 {
                    return Err(err(at, format!("ClosePath count {count}, expected 1")));
                }
            }
            _ => {
                return Err(err(at, format!("command {id} not valid for {geom_type:?} geometry")));
            }
        }
    }
    if paths.is_empty() && geom_type != GeomType::Unknown {
        return Err(err(0, "empty geometry".into()));
    }
    Ok(paths)
}
