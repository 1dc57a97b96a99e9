//! Luminance rasters, PNM input/output and integral-image tables.

mod integral;
mod pnm;

pub use integral::{Channel, IntegralPair};
pub use pnm::{decode_pnm, encode_ppm, PnmError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted width or height.
pub const MAX_DIMENSION: u32 = 8192;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImagingError {
    #[error("invalid image dimensions {width}x{height}")]
    Dimensions { width: u32, height: u32 },
    #[error("pixel buffer holds {actual} samples, expected {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("rectangle {rect:?} exceeds {width}x{height} image")]
    OutOfBounds { rect: Rect, width: u32, height: u32 },
}

fn check_dimensions(width: u32, height: u32) -> Result<(), ImagingError> {
    if width == 0 || height == 0 || width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(ImagingError::Dimensions { width, height });
    }
    Ok(())
}

/// Axis-aligned pixel rectangle, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub const fn right(&self) -> u32 {
        self.x + self.w
    }

    pub const fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub const fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }

    /// True when `self` has positive extent and lies inside a `width`x`height` raster.
    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.w >= 1
            && self.h >= 1
            && self.x as u64 + self.w as u64 <= width as u64
            && self.y as u64 + self.h as u64 <= height as u64
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    pub fn translate(&self, dx: u32, dy: u32) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.w, self.h)
    }
}

/// 8-bit single-channel raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImagingError> {
        check_dimensions(width, height)?;
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(ImagingError::BufferLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self, ImagingError> {
        check_dimensions(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    /// Paints `rect` (clipped to the image) with `value`.
    pub fn fill_rect(&mut self, rect: Rect, value: u8) {
        let x1 = rect.right().min(self.width);
        let y1 = rect.bottom().min(self.height);
        for y in rect.y.min(y1)..y1 {
            for x in rect.x.min(x1)..x1 {
                self.set(x, y, value);
            }
        }
    }

    pub fn to_rgb(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| [v, v, v]).collect(),
        }
    }
}

/// 8-bit RGB raster used for annotated output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Draws the border of `rect` inward with the given thickness, clipped to the image.
    pub fn draw_rect(&mut self, rect: Rect, thickness: u32, color: [u8; 3]) {
        let x1 = rect.right().min(self.width);
        let y1 = rect.bottom().min(self.height);
        for y in rect.y.min(y1)..y1 {
            for x in rect.x.min(x1)..x1 {
                let edge = x < rect.x + thickness
                    || y < rect.y + thickness
                    || x + thickness >= rect.right()
                    || y + thickness >= rect.bottom();
                if edge {
                    self.data[y as usize * self.width as usize + x as usize] = color;
                }
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Pnm {
        path: String,
        #[source]
        source: PnmError,
    },
    #[error("{path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Size {
        path: String,
        #[source]
        source: ImagingError,
    },
}

/// Reads a grayscale image. `.pgm`/`.ppm`/`.pnm` and files starting with a
/// PNM magic go through [`decode_pnm`]; anything else through the `image`
/// crate (PNG and JPEG are enabled).
pub fn load_gray(path: &std::path::Path) -> Result<GrayImage, LoadError> {
    let name = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
        path: name.clone(),
        source,
    })?;
    let pnm_ext = matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("pgm" | "ppm" | "pnm")
    );
    if pnm_ext || matches!(bytes.get(..2), Some(b"P2" | b"P3" | b"P5" | b"P6")) {
        return decode_pnm(&bytes).map_err(|source| LoadError::Pnm { path: name, source });
    }
    let luma = image::load_from_memory(&bytes)
        .map_err(|source| LoadError::Decode {
            path: name.clone(),
            source,
        })?
        .to_luma8();
    let (w, h) = luma.dimensions();
    GrayImage::new(w, h, luma.into_raw()).map_err(|source| LoadError::Size { path: name, source })
}

/// BT.601 luma with round-half-up, in integer thousandths.
#[inline]
pub fn luminance(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}
