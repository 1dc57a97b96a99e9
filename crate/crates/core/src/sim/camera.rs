use serde::{Deserialize, Serialize};

use crate::imaging::Rect;
use crate::ned::Ned;

use super::world::SimState;

/// Pinhole camera looking along body +x, principal point at the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel {
    pub img_w: u32,
    pub img_h: u32,
    /// Focal length in pixels.
    pub focal: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            img_w: 320,
            img_h: 240,
            focal: 300.0,
        }
    }
}

impl CameraModel {
    pub fn cx(&self) -> f64 {
        self.img_w as f64 / 2.0
    }

    pub fn cy(&self) -> f64 {
        self.img_h as f64 / 2.0
    }
}

/// Nearest range at which the target still projects.
pub const MIN_FORWARD: f64 = 0.2;

/// NED offset rotated into the body frame (forward, right, down) for a
/// vehicle at heading `yaw`.
pub fn ned_to_body(v: Ned, yaw: f64) -> (f64, f64, f64) {
    let (s, c) = yaw.sin_cos();
    (c * v.n + s * v.e, -s * v.n + c * v.e, v.d)
}

pub fn body_to_ned(fwd: f64, right: f64, down: f64, yaw: f64) -> Ned {
    let (s, c) = yaw.sin_cos();
    Ned::new(c * fwd - s * right, s * fwd + c * right, down)
}

/// Box edges in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelBox {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl PixelBox {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    /// Rounded edges clipped to the image; `None` when nothing is left.
    pub fn to_rect(&self, img_w: u32, img_h: u32) -> Option<Rect> {
        let clamp = |v: f64, hi: u32| v.round().clamp(0.0, hi as f64) as u32;
        let (l, r) = (clamp(self.left, img_w), clamp(self.right, img_w));
        let (t, b) = (clamp(self.top, img_h), clamp(self.bottom, img_h));
        (r > l && b > t).then(|| Rect::new(l, t, r - l, b - t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Face center in pixels, unclipped.
    pub center: (f64, f64),
    /// Forward distance along the boresight, meters.
    pub forward: f64,
    pub face_px: PixelBox,
    pub body_px: PixelBox,
    /// Clipped integer boxes; `face ⊆ body`.
    pub face: Rect,
    pub body: Rect,
}

/// Where the target's face and upper body land in the image. `None` when the
/// face is closer than [`MIN_FORWARD`] or entirely off-image.
pub fn project_target(s: &SimState, cam: &CameraModel) -> Option<Projection> {
    let (dx, dy, dz) = ned_to_body(s.target_pos - s.drone_pos, s.drone_yaw);
    if dx <= MIN_FORWARD {
        return None;
    }
    let k = cam.focal / dx;
    let (u, v) = (cam.cx() + k * dy, cam.cy() + k * dz);
    let g = &s.geometry;
    let face_half = k * g.face_w / 2.0;
    let face_px = PixelBox {
        left: u - face_half,
        top: v - face_half,
        right: u + face_half,
        bottom: v + face_half,
    };
    let body_top = v - k * g.face_w * super::world::BODY_TOP_ABOVE_FACE_CENTER;
    let body_px = PixelBox {
        left: u - k * g.body_w / 2.0,
        top: body_top,
        right: u + k * g.body_w / 2.0,
        bottom: body_top + k * g.body_h,
    };
    let face = face_px.to_rect(cam.img_w, cam.img_h)?;
    let body = body_px.to_rect(cam.img_w, cam.img_h)?;
    Some(Projection {
        center: (u, v),
        forward: dx,
        face_px,
        body_px,
        face,
        body,
    })
}
