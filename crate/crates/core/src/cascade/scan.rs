use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Cascade, CascadeError, Detection, ScaledCascade, WindowOutcome};
use crate::imaging::{GrayImage, IntegralPair, Rect};

/// Sliding-window scan configuration. Sizes are window widths in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanParams {
    /// Ratio between successive window sizes, > 1.
    pub scale_factor: f64,
    /// Smallest window width; values below the base width scan from the base.
    pub min_size: u32,
    /// Largest window width, unbounded when absent.
    pub max_size: Option<u32>,
    /// Stride is `max(1, round(window_w / step_divisor))`.
    pub step_divisor: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            scale_factor: 1.2,
            min_size: 0,
            max_size: None,
            step_divisor: 24.0,
        }
    }
}

impl ScanParams {
    pub fn validate(&self) -> Result<(), CascadeError> {
        if !(self.scale_factor.is_finite() && self.scale_factor > 1.0) {
            return Err(CascadeError::Params("scale_factor must be finite and > 1"));
        }
        if !(self.step_divisor.is_finite() && self.step_divisor > 0.0) {
            return Err(CascadeError::Params("step_divisor must be finite and > 0"));
        }
        if matches!(self.max_size, Some(m) if m < self.min_size) {
            return Err(CascadeError::Params("max_size below min_size"));
        }
        Ok(())
    }

    pub fn stride(&self, window_w: u32) -> u32 {
        ((window_w as f64 / self.step_divisor).round() as u32).max(1)
    }
}

/// Window sizes `base · scale_factor^k` (heights follow the base aspect) that
/// fit a `region_w` x `region_h` area and the size limits, ascending.
pub fn window_sizes(c: &Cascade, region_w: u32, region_h: u32, p: &ScanParams) -> Vec<(u32, u32)> {
    let mut sizes: Vec<(u32, u32)> = Vec::new();
    let max_w = p.max_size.unwrap_or(u32::MAX);
    let mut factor = 1.0f64;
    loop {
        let w = (c.base_w() as f64 * factor).round() as u32;
        let h = (c.base_h() as f64 * w as f64 / c.base_w() as f64).round() as u32;
        if w > region_w || h > region_h || w > max_w {
            break;
        }
        if w >= p.min_size && sizes.last().map_or(true, |&(lw, _)| lw != w) {
            sizes.push((w, h));
        }
        factor *= p.scale_factor;
    }
    sizes
}

/// Accepted windows of one size inside `region`, in (y, x) order.
pub fn scan_size(
    c: &Cascade,
    ip: &IntegralPair,
    region: Rect,
    size: (u32, u32),
    stride: u32,
) -> Result<Vec<Detection>, CascadeError> {
    let (w, h) = size;
    if w > region.w || h > region.h {
        return Ok(Vec::new());
    }
    let scaled = ScaledCascade::new(c, w, h)?;
    let stages = c.stages().len();
    let stride = stride.max(1);
    let rows = (region.h - h) / stride + 1;
    let cols = (region.w - w) / stride + 1;
    let found = (0..rows)
        .into_par_iter()
        .flat_map_iter(|row| {
            let y = region.y + row * stride;
            let scaled = &scaled;
            (0..cols).filter_map(move |col| {
                let x = region.x + col * stride;
                match scaled.evaluate(ip, x, y) {
                    WindowOutcome::Accept { score } => {
                        Some(Detection::new(Rect::new(x, y, w, h), stages, score))
                    }
                    WindowOutcome::Reject { .. } => None,
                }
            })
        })
        .collect();
    Ok(found)
}

/// All accepted windows inside `region` of an already-integrated image,
/// ordered by (scale ascending, y, x). No grouping is applied.
pub fn detect_in_region(
    c: &Cascade,
    ip: &IntegralPair,
    region: Rect,
    p: &ScanParams,
) -> Result<Vec<Detection>, CascadeError> {
    p.validate()?;
    if !region.fits(ip.width(), ip.height()) {
        return Err(CascadeError::Window {
            window: region,
            message: "scan region outside the image".into(),
        });
    }
    let mut out = Vec::new();
    for size in window_sizes(c, region.w, region.h, p) {
        out.extend(scan_size(c, ip, region, size, p.stride(size.0))?);
    }
    Ok(out)
}

pub fn detect_multiscale(c: &Cascade, img: &GrayImage, p: &ScanParams) -> Result<Vec<Detection>, CascadeError> {
    let ip = IntegralPair::new(img);
    detect_in_region(c, &ip, img.bounds(), p)
}
