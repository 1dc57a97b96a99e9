//! Rectangle (Haar-like) features and their evaluation over integral tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{IntegralPair, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    TwoRect,
    ThreeRect,
    FourRect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedRect {
    pub rect: Rect,
    pub weight: f64,
}

/// Signed weighted sum of rectangle sums, in base-window coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarFeature {
    pub kind: FeatureKind,
    pub parts: Vec<WeightedRect>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("window {window:?} exceeds {width}x{height} image")]
    WindowOutOfBounds { window: Rect, width: u32, height: u32 },
    #[error("part {part} scales to {rect:?}, outside the {window_w}x{window_h} window")]
    EscapesWindow {
        part: usize,
        rect: Rect,
        window_w: u32,
        window_h: u32,
    },
}

impl HaarFeature {
    pub fn new(kind: FeatureKind, parts: Vec<WeightedRect>) -> Self {
        Self { kind, parts }
    }

    /// True when every part has positive extent and fits a `w`x`h` window.
    pub fn fits(&self, w: u32, h: u32) -> bool {
        self.parts.iter().all(|p| p.rect.fits(w, h))
    }

    pub fn negated(&self) -> Self {
        Self {
            kind: self.kind,
            parts: self
                .parts
                .iter()
                .map(|p| WeightedRect {
                    rect: p.rect,
                    weight: -p.weight,
                })
                .collect(),
        }
    }

    /// Resolves part rectangles for a window of the given size at `scale`.
    pub fn scaled(&self, scale: f64, window_w: u32, window_h: u32) -> Result<ScaledFeature, FeatureError> {
        let mut parts = Vec::with_capacity(self.parts.len());
        for (i, p) in self.parts.iter().enumerate() {
            let rect = scale_rect(p.rect, scale);
            if !rect.fits(window_w, window_h) {
                return Err(FeatureError::EscapesWindow {
                    part: i,
                    rect,
                    window_w,
                    window_h,
                });
            }
            parts.push(WeightedRect {
                rect,
                weight: p.weight,
            });
        }
        Ok(ScaledFeature { parts })
    }
}

/// Scales a base-window rectangle by rounding each edge (half away from zero);
/// extents are at least one pixel. Rounding edges rather than extents keeps any
/// rectangle inside the base window inside the window of size `round(base · scale)`.
pub fn scale_rect(r: Rect, scale: f64) -> Rect {
    let s = |v: u32| (v as f64 * scale).round() as u32;
    let (x, y) = (s(r.x), s(r.y));
    let w = s(r.x + r.w).saturating_sub(x).max(1);
    let h = s(r.y + r.h).saturating_sub(y).max(1);
    Rect::new(x, y, w, h)
}

/// A feature with part rectangles resolved for one window size, relative to
/// the window origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledFeature {
    parts: Vec<WeightedRect>,
}

impl ScaledFeature {
    /// Raw value at window origin `(ox, oy)`. The caller guarantees the window fits.
    #[inline]
    pub(crate) fn raw_at(&self, ip: &IntegralPair, ox: u32, oy: u32) -> f64 {
        self.parts
            .iter()
            .map(|p| p.weight * ip.sum_unchecked(p.rect.translate(ox, oy)) as f64)
            .sum()
    }
}

/// Raw feature value over `window`: Σ weight · rect_sum(scaled part).
pub fn feature_value(
    ip: &IntegralPair,
    f: &HaarFeature,
    window: Rect,
    scale: f64,
) -> Result<f64, FeatureError> {
    if !window.fits(ip.width(), ip.height()) {
        return Err(FeatureError::WindowOutOfBounds {
            window,
            width: ip.width(),
            height: ip.height(),
        });
    }
    let scaled = f.scaled(scale, window.w, window.h)?;
    Ok(scaled.raw_at(ip, window.x, window.y))
}

/// The canonical feature templates: a grid of `cols` x `rows` equal cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Template {
    /// Left +1, right −1.
    EdgeHorizontal,
    /// Top +1, bottom −1.
    EdgeVertical,
    /// Outer cells +1, center −2, side by side.
    LineHorizontal,
    /// Outer cells +1, center −2, stacked.
    LineVertical,
    /// Diagonal cells +1, anti-diagonal cells −1.
    Diagonal,
}

impl Template {
    pub const ALL: [Template; 5] = [
        Template::EdgeHorizontal,
        Template::EdgeVertical,
        Template::LineHorizontal,
        Template::LineVertical,
        Template::Diagonal,
    ];

    /// Grid shape in cells, (columns, rows).
    pub fn cells(self) -> (u32, u32) {
        match self {
            Template::EdgeHorizontal => (2, 1),
            Template::EdgeVertical => (1, 2),
            Template::LineHorizontal => (3, 1),
            Template::LineVertical => (1, 3),
            Template::Diagonal => (2, 2),
        }
    }

    pub fn kind(self) -> FeatureKind {
        match self {
            Template::EdgeHorizontal | Template::EdgeVertical => FeatureKind::TwoRect,
            Template::LineHorizontal | Template::LineVertical => FeatureKind::ThreeRect,
            Template::Diagonal => FeatureKind::FourRect,
        }
    }

    /// Instantiates the template at `(x, y)` with cell size `sw` x `sh`.
    pub fn instantiate(self, x: u32, y: u32, sw: u32, sh: u32) -> HaarFeature {
        let cell = |cx: u32, cy: u32, weight: f64| WeightedRect {
            rect: Rect::new(x + cx * sw, y + cy * sh, sw, sh),
            weight,
        };
        let parts = match self {
            Template::EdgeHorizontal => vec![cell(0, 0, 1.0), cell(1, 0, -1.0)],
            Template::EdgeVertical => vec![cell(0, 0, 1.0), cell(0, 1, -1.0)],
            Template::LineHorizontal => vec![cell(0, 0, 1.0), cell(1, 0, -2.0), cell(2, 0, 1.0)],
            Template::LineVertical => vec![cell(0, 0, 1.0), cell(0, 1, -2.0), cell(0, 2, 1.0)],
            Template::Diagonal => vec![
                cell(0, 0, 1.0),
                cell(1, 0, -1.0),
                cell(0, 1, -1.0),
                cell(1, 1, 1.0),
            ],
        };
        HaarFeature::new(self.kind(), parts)
    }
}

/// Every placement and integer cell scaling of `template` in a `base_w` x `base_h`
/// window, ordered by (y, x, sh, sw).
pub fn enumerate_template(template: Template, base_w: u32, base_h: u32) -> Vec<HaarFeature> {
    let (cols, rows) = template.cells();
    let mut out = Vec::new();
    for y in 0..base_h {
        for x in 0..base_w {
            let mut sh = 1;
            while y + rows * sh <= base_h {
                let mut sw = 1;
                while x + cols * sw <= base_w {
                    out.push(template.instantiate(x, y, sw, sh));
                    sw += 1;
                }
                sh += 1;
            }
        }
    }
    out
}

/// All five templates over the base window, in template order.
pub fn enumerate_base_features(base_w: u32, base_h: u32) -> Vec<HaarFeature> {
    Template::ALL
        .iter()
        .flat_map(|&t| enumerate_template(t, base_w, base_h))
        .collect()
}
