//! Two-step detection: upper bodies first, then faces searched only inside
//! each upper-body box.

use serde::{Deserialize, Serialize};

use crate::cascade::{detect_in_region, group_detections, Cascade, CascadeError, Detection, GroupParams, ScanParams};
use crate::imaging::{GrayImage, IntegralPair, RgbImage};

/// A face together with the upper-body box it was found in. Both boxes are
/// in full-image coordinates and `face.bbox ⊆ body.bbox`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatedDetection {
    pub body: Detection,
    pub face: Detection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateParams {
    pub body_scan: ScanParams,
    pub face_scan: ScanParams,
    pub body_group: GroupParams,
    pub face_group: GroupParams,
    /// Smallest face width searched, as a fraction of the body box width.
    pub face_min_fraction: f64,
}

impl Default for GateParams {
    fn default() -> Self {
        Self {
            body_scan: ScanParams::default(),
            face_scan: ScanParams::default(),
            body_group: GroupParams::default(),
            face_group: GroupParams::default(),
            face_min_fraction: 0.2,
        }
    }
}

impl GateParams {
    pub fn validate(&self) -> Result<(), CascadeError> {
        self.body_scan.validate()?;
        self.face_scan.validate()?;
        if !(self.face_min_fraction > 0.0 && self.face_min_fraction <= 1.0) {
            return Err(CascadeError::Params("face_min_fraction must be in (0, 1]"));
        }
        for g in [self.body_group, self.face_group] {
            if !(g.eps > 0.0 && g.eps < 1.0) {
                return Err(CascadeError::Params("grouping eps must be in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// Grouped upper-body detections over the whole image.
pub fn detect_bodies(
    body: &Cascade,
    ip: &IntegralPair,
    p: &GateParams,
) -> Result<Vec<Detection>, CascadeError> {
    let full = crate::imaging::Rect::new(0, 0, ip.width(), ip.height());
    let raw = detect_in_region(body, ip, full, &p.body_scan)?;
    Ok(group_detections(&raw, p.body_group.min_neighbors, p.body_group.eps))
}

/// Largest grouped face inside `body`, if any.
pub fn face_in_body(
    face: &Cascade,
    ip: &IntegralPair,
    body: &Detection,
    p: &GateParams,
) -> Result<Option<Detection>, CascadeError> {
    let min_face = (p.face_min_fraction * body.bbox.w as f64).ceil() as u32;
    let scan = ScanParams {
        min_size: p.face_scan.min_size.max(min_face),
        ..p.face_scan
    };
    let raw = detect_in_region(face, ip, body.bbox, &scan)?;
    let grouped = group_detections(&raw, p.face_group.min_neighbors, p.face_group.eps);
    Ok(largest(grouped.iter()).copied())
}

/// Faces found only within upper-body regions, at most one per body, in body
/// scan order.
pub fn detect_gated(
    body: &Cascade,
    face: &Cascade,
    img: &GrayImage,
    p: &GateParams,
) -> Result<Vec<GatedDetection>, CascadeError> {
    p.validate()?;
    let ip = IntegralPair::new(img);
    detect_gated_integral(body, face, &ip, p)
}

pub fn detect_gated_integral(
    body: &Cascade,
    face: &Cascade,
    ip: &IntegralPair,
    p: &GateParams,
) -> Result<Vec<GatedDetection>, CascadeError> {
    let bodies = detect_bodies(body, ip, p)?;
    gate_faces(face, ip, &bodies, p)
}

/// Runs the face search inside each of the given body boxes.
pub fn gate_faces(
    face: &Cascade,
    ip: &IntegralPair,
    bodies: &[Detection],
    p: &GateParams,
) -> Result<Vec<GatedDetection>, CascadeError> {
    let mut out = Vec::new();
    for b in bodies {
        if let Some(f) = face_in_body(face, ip, b, p)? {
            debug_assert!(b.bbox.contains(&f.bbox));
            out.push(GatedDetection { body: *b, face: f });
        }
    }
    Ok(out)
}

/// Largest area first, then smallest y, then smallest x; earliest on full ties.
fn largest<'a>(dets: impl Iterator<Item = &'a Detection>) -> Option<&'a Detection> {
    let key = |d: &Detection| (d.bbox.area(), std::cmp::Reverse(d.bbox.y), std::cmp::Reverse(d.bbox.x));
    dets.fold(None, |best: Option<&Detection>, d| match best {
        Some(b) if key(b) >= key(d) => Some(b),
        _ => Some(d),
    })
}

/// The tracked target: the entry with the largest face, ties broken by the
/// face box's smallest y and then x.
pub fn select_target(dets: &[GatedDetection]) -> Option<GatedDetection> {
    let faces: Vec<Detection> = dets.iter().map(|g| g.face).collect();
    let best = largest(faces.iter())?;
    let idx = faces.iter().position(|f| std::ptr::eq(f, best)).expect("from the same slice");
    Some(dets[idx])
}

pub const BODY_COLOR: [u8; 3] = [0, 200, 0];
pub const FACE_COLOR: [u8; 3] = [220, 0, 0];
pub const BOX_THICKNESS: u32 = 3;

/// Draws body boxes in green and face boxes in red.
pub fn annotate(img: &GrayImage, bodies: &[Detection], faces: &[Detection]) -> RgbImage {
    let mut rgb = img.to_rgb();
    for b in bodies {
        rgb.draw_rect(b.bbox, BOX_THICKNESS, BODY_COLOR);
    }
    for f in faces {
        rgb.draw_rect(f.bbox, BOX_THICKNESS, FACE_COLOR);
    }
    rgb
}
