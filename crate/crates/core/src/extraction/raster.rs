use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon};

/// Placement of a raster in world coordinates.
///
/// `origin` is the world position of the top-left corner of pixel (0, 0).
/// Columns run east (+x) and rows run south (-y), as in north-up map tiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Georef {
    /// Meters per pixel.
    pub scale: f64,
    pub origin: Point2,
}

impl Georef {
    pub fn new(scale: f64, origin: Point2) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !origin.is_finite() {
            return Err(Error::Precondition(format!(
                "georeference needs finite origin and scale > 0, got {scale}"
            )));
        }
        Ok(Georef { scale, origin })
    }

    /// Continuous pixel coordinates (pixel `(c, r)` spans `[c, c+1) x [r, r+1)`)
    /// to world coordinates.
    pub fn pixel_to_world(&self, px: f64, py: f64) -> Point2 {
        Point2::new(
            self.origin.x + px * self.scale,
            self.origin.y - py * self.scale,
        )
    }

    pub fn world_to_pixel(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.origin.x) / self.scale,
            (self.origin.y - p.y) / self.scale,
        )
    }

    /// World position of the centre of pixel `(col, row)`.
    pub fn pixel_center(&self, col: usize, row: usize) -> Point2 {
        self.pixel_to_world(col as f64 + 0.5, row as f64 + 0.5)
    }
}

/// Row-major RGB raster with a georeference.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
    pub georef: Georef,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>, georef: Georef) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Precondition(
                "raster needs width and height >= 1".into(),
            ));
        }
        if pixels.len() != width * height {
            return Err(Error::Precondition(format!(
                "{} pixels for a {width}x{height} raster",
                pixels.len()
            )));
        }
        Georef::new(georef.scale, georef.origin)?;
        Ok(RasterImage {
            width,
            height,
            pixels,
            georef,
        })
    }

    pub fn filled(width: usize, height: usize, color: [u8; 3], georef: Georef) -> Result<Self> {
        Self::new(width, height, vec![color; width * height], georef)
    }

    /// Reads a PNG or PPM file (format by content).
    pub fn load(path: &Path, georef: Georef) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let img = image::load_from_memory(&bytes)?.to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let pixels = img.pixels().map(|p| p.0).collect();
        Self::new(w, h, pixels, georef)
    }

    /// Writes the raster; the format follows the file extension.
    pub fn save(&self, path: &Path) -> Result<()> {
        let flat: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        let buf = image::RgbImage::from_raw(self.width as u32, self.height as u32, flat)
            .expect("buffer size matches dimensions");
        buf.save(path)?;
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, col: usize, row: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, color: [u8; 3]) {
        self.pixels[row * self.width + col] = color;
    }

    /// Paints every pixel whose centre lies inside `polygon` (world
    /// coordinates). Returns the number of pixels painted.
    pub fn fill_polygon(&mut self, polygon: &Polygon, color: [u8; 3]) -> usize {
        let (lo, hi) = polygon.bbox();
        let (c0, r1) = self.georef.world_to_pixel(lo);
        let (c1, r0) = self.georef.world_to_pixel(hi);
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n);
        let (c0, c1) = (clamp(c0, self.width), clamp(c1 + 1.0, self.width));
        let (r0, r1) = (clamp(r0, self.height), clamp(r1 + 1.0, self.height));
        let mut painted = 0;
        for row in r0..r1 {
            for col in c0..c1 {
                if polygon.contains(self.georef.pixel_center(col, row)) {
                    self.set(col, row, color);
                    painted += 1;
                }
            }
        }
        painted
    }

    /// Luminance in `[0, 1]`.
    pub fn to_gray(&self) -> GrayImage {
        let data = self
            .pixels
            .iter()
            .map(|p| (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64) / 255.0)
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Single-channel floating point image.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::Precondition(format!(
                "{} values for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Value with coordinates clamped to the border.
    pub fn at(&self, col: isize, row: isize) -> f64 {
        let c = col.clamp(0, self.width as isize - 1) as usize;
        let r = row.clamp(0, self.height as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    /// Separable Gaussian blur; `sigma <= 0` returns a copy.
    pub fn blurred(&self, sigma: f64) -> GrayImage {
        if !(sigma > 0.0) {
            return self.clone();
        }
        let radius = (3.0 * sigma).ceil() as isize;
        let kernel: Vec<f64> = (-radius..=radius)
            .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let norm: f64 = kernel.iter().sum();
        let pass = |src: &GrayImage, horizontal: bool| {
            let mut out = vec![0.0; src.data.len()];
            for r in 0..src.height as isize {
                for c in 0..src.width as isize {
                    let mut acc = 0.0;
                    for (k, w) in kernel.iter().enumerate() {
                        let o = k as isize - radius;
                        acc += w * if horizontal {
                            src.at(c + o, r)
                        } else {
                            src.at(c, r + o)
                        };
                    }
                    out[r as usize * src.width + c as usize] = acc / norm;
                }
            }
            GrayImage {
                width: src.width,
                height: src.height,
                data: out,
            }
        };
        pass(&pass(self, true), false)
    }
}

/// Binary raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// Pixels whose every channel is within `tolerance` of `target`.
pub fn color_mask(image: &RasterImage, target: [u8; 3], tolerance: u8) -> Mask {
    let data = image
        .pixels
        .iter()
        .map(|p| (0..3).all(|k| p[k].abs_diff(target[k]) <= tolerance))
        .collect();
    Mask {
        width: image.width,
        height: image.height,
        data,
    }
}
