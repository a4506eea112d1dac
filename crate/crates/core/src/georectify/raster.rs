use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transform::Transform2D;
use super::GeorectifyError;
use crate::geo::MercatorBounds;
use crate::scalar::Scalar;

/// 8-bit raster, row-major, 1 (gray) or 4 (RGBA) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self, GeorectifyError> {
        if channels != 1 && channels != 4 {
            return Err(GeorectifyError::Channels(channels));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(GeorectifyError::RasterSize {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// RGBA value of pixel `(x, y)`; gray expands to opaque RGB.
    fn rgba(&self, x: u32, y: u32) -> [u8; 4] {
        let i = (y as usize * self.width as usize + x as usize) * self.channels as usize;
        if self.channels == 1 {
            let g = self.data[i];
            [g, g, g, 255]
        } else {
            [self.data[i], self.data[i + 1], self.data[i + 2], self.data[i + 3]]
        }
    }

    /// Loads a PNG; grayscale without alpha stays single-channel, anything
    /// else becomes RGBA.
    pub fn read_png(path: &Path) -> Result<Self, GeorectifyError> {
        let img = image::open(path)?;
        let (w, h) = (img.width(), img.height());
        match img {
            image::DynamicImage::ImageLuma8(buf) => Self::new(w, h, 1, buf.into_raw()),
            other => Self::new(w, h, 4, other.to_rgba8().into_raw()),
        }
    }

    pub fn write_png(&self, path: &Path) -> Result<(), GeorectifyError> {
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgba8
        };
        image::save_buffer_with_format(path, &self.data, self.width, self.height, color, image::ImageFormat::Png)?;
        Ok(())
    }
}

/// Target raster: a north-up Mercator rectangle sampled at `width x height`.
/// Row 0 is the northern edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputGrid {
    pub bounds: MercatorBounds<f64>,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resampling {
    Nearest,
    Bilinear,
}

/// Resamples `img` onto `grid`.
///
/// Every output pixel center is pushed through `inv` (Mercator -> source
/// pixel). Source pixel `(i, j)` covers `[i, i+1) x [j, j+1)`. Samples
/// falling outside the source become fully transparent. Output is always
/// RGBA. Bilinear blends round half away from zero, so a 50/50 blend of 0
/// and 255 gives 128.
pub fn warp_raster<T: Scalar>(
    img: &RasterImage,
    inv: &Transform2D<T>,
    grid: &OutputGrid,
    resampling: Resampling,
) -> Result<RasterImage, GeorectifyError> {
    inv.validate()?;
    let b = grid.bounds;
    if grid.width == 0 || grid.height == 0 || !(b.width() > 0.0) || !(b.height() > 0.0) {
        return Err(GeorectifyError::ZeroAreaGrid);
    }
    let px_w = b.width() / grid.width as f64;
    let px_h = b.height() / grid.height as f64;
    let row_len = grid.width as usize * 4;
    let mut out = vec![0u8; row_len * grid.height as usize];
    out.par_chunks_mut(row_len).enumerate().for_each(|(row, line)| {
        let y = b.max_y - (row as f64 + 0.5) * px_h;
        for col in 0..grid.width as usize {
            let x = b.min_x + (col as f64 + 0.5) * px_w;
            let (u, v) = inv.eval(T::lit(x), T::lit(y));
            let (u, v) = (u.as_f64(), v.as_f64());
            let px = match resampling {
                Resampling::Nearest => sample_nearest(img, u, v),
                Resampling::Bilinear => sample_bilinear(img, u, v),
            };
            line[col * 4..col * 4 + 4].copy_from_slice(&px);
        }
    });
    RasterImage::new(grid.width, grid.height, 4, out)
}

fn inside(img: &RasterImage, u: f64, v: f64) -> bool {
    u.is_finite() && v.is_finite() && u >= 0.0 && v >= 0.0 && u < img.width as f64 && v < img.height as f64
}

fn sample_nearest(img: &RasterImage, u: f64, v: f64) -> [u8; 4] {
    if !inside(img, u, v) {
        return [0; 4];
    }
    let x = ((u - 0.5).round().max(0.0) as u32).min(img.width - 1);
    let y = ((v - 0.5).round().max(0.0) as u32).min(img.height - 1);
    img.rgba(x, y)
}

fn sample_bilinear(img: &RasterImage, u: f64, v: f64) -> [u8; 4] {
    if !inside(img, u, v) {
        return [0; 4];
    }
    let (fx, fy) = (u - 0.5, v - 0.5);
    let (x0, y0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - x0, fy - y0);
    let clamp = |c: f64, max: u32| c.max(0.0).min((max - 1) as f64) as u32;
    let (xa, xb) = (clamp(x0, img.width), clamp(x0 + 1.0, img.width));
    let (ya, yb) = (clamp(y0, img.height), clamp(y0 + 1.0, img.height));
    let (p00, p10, p01, p11) = (img.rgba(xa, ya), img.rgba(xb, ya), img.rgba(xa, yb), img.rgba(xb, yb));
    let mut out = [0u8; 4];
    for c in 0..4 {
        let top = p00[c] as f64 * (1.0 - tx) + p10[c] as f64 * tx;
        let bottom = p01[c] as f64 * (1.0 - tx) + p11[c] as f64 * tx;
        let val = top * (1.0 - ty) + bottom * ty;
        out[c] = val.round().clamp(0.0, 255.0) as u8;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgba_ramp(w: u32, h: u32) -> RasterImage {
        let data = (0..w * h)
            .flat_map(|i| [(i * 7 % 256) as u8, (i * 13 % 256) as u8, (i % 256) as u8, 255])
            .collect();
        RasterImage::new(w, h, 4, data).unwrap()
    }

    /// Georeference that places pixel (i, j) at Mercator (i, -j).
    fn image_frame() -> Transform2D<f64> {
        Transform2D::affine([1.0, 0.0, 0.0], [0.0, -1.0, 0.0])
    }

    #[test]
    fn congruent_grid_is_identity() {
        let img = rgba_ramp(7, 5);
        let grid = OutputGrid {
            bounds: MercatorBounds::new(0.0, -5.0, 7.0, 0.0),
            width: 7,
            height: 5,
        };
        for mode in [Resampling::Nearest, Resampling::Bilinear] {
            let out = warp_raster(&img, &image_frame(), &grid, mode).unwrap();
            assert_eq!(out, img);
        }
    }

    #[test]
    fn integer_shift_nearest() {
        let img = rgba_ramp(6, 4);
        // output pixel (c, r) samples source (c + 2, r)
        let inv = Transform2D::affine([1.0, 0.0, 2.0], [0.0, -1.0, 0.0]);
        let grid = OutputGrid {
            bounds: MercatorBounds::new(0.0, -4.0, 6.0, 0.0),
            width: 6,
            height: 4,
        };
        let out = warp_raster(&img, &inv, &grid, Resampling::Nearest).unwrap();
        for r in 0..4u32 {
            for c in 0..6u32 {
                let got = &out.data[((r * 6 + c) * 4) as usize..][..4];
                if c + 2 < 6 {
                    assert_eq!(got, img.rgba(c + 2, r));
                } else {
                    assert_eq!(got, [0, 0, 0, 0]);
                }
            }
        }
    }

    #[test]
    fn half_pixel_bilinear_blend() {
        let img = RasterImage::new(2, 1, 1, vec![0, 255]).unwrap();
        let inv = Transform2D::affine([1.0, 0.0, 0.5], [0.0, -1.0, 0.0]);
        let grid = OutputGrid {
            bounds: MercatorBounds::new(0.0, -1.0, 1.0, 0.0),
            width: 1,
            height: 1,
        };
        let out = warp_raster(&img, &inv, &grid, Resampling::Bilinear).unwrap();
        assert_eq!(out.data, vec![128, 128, 128, 255]);
    }

    #[test]
    fn zero_area_grid_rejected() {
        let img = rgba_ramp(2, 2);
        let grid = OutputGrid {
            bounds: MercatorBounds::new(0.0, 0.0, 0.0, 1.0),
            width: 2,
            height: 2,
        };
        assert!(matches!(
            warp_raster(&img, &image_frame(), &grid, Resampling::Nearest),
            Err(GeorectifyError::ZeroAreaGrid)
        ));
    }

    #[test]
    fn raster_shape_validation() {
        assert!(RasterImage::new(2, 2, 3, vec![0; 12]).is_err());
        assert!(RasterImage::new(2, 2, 1, vec![0; 3]).is_err());
    }
}
