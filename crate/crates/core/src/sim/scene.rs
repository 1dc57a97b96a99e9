use crate::cascade::{parse_cascade, Cascade};
use crate::imaging::GrayImage;

use super::camera::{CameraModel, PixelBox, Projection};

pub const BACKGROUND: u8 = 200;
pub const BODY: u8 = 60;
pub const FACE: u8 = 20;
pub const FOREHEAD: u8 = 230;

const BODY_CASCADE: &str = include_str!("../../fixtures/cascades/body.json");
const FACE_CASCADE: &str = include_str!("../../fixtures/cascades/face.json");

/// Body and face cascades used together for gated detection.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadePair {
    pub body: Cascade,
    pub face: Cascade,
}

/// The handcrafted cascades matched to [`render_scene`].
pub fn scene_cascades() -> CascadePair {
    CascadePair {
        body: parse_cascade(BODY_CASCADE).expect("bundled body cascade"),
        face: parse_cascade(FACE_CASCADE).expect("bundled face cascade"),
    }
}

fn fill(img: &mut GrayImage, b: &PixelBox, value: u8) {
    let clip = |v: f64, hi: u32| v.round().clamp(0.0, hi as f64) as u32;
    let (l, r) = (clip(b.left, img.width()), clip(b.right, img.width()));
    let (t, bt) = (clip(b.top, img.height()), clip(b.bottom, img.height()));
    for y in t..bt {
        for x in l..r {
            img.set(x, y, value);
        }
    }
}

/// Flat synthetic frame: bright background, dark upper body, darker face with
/// a bright band across its second sixth.
pub fn render_scene(p: Option<&Projection>, cam: &CameraModel) -> GrayImage {
    let mut img = GrayImage::filled(cam.img_w, cam.img_h, BACKGROUND).expect("camera size");
    if let Some(p) = p {
        fill(&mut img, &p.body_px, BODY);
        fill(&mut img, &p.face_px, FACE);
        let h = p.face_px.height();
        let band = PixelBox {
            top: p.face_px.top + h / 6.0,
            bottom: p.face_px.top + h / 3.0,
            ..p.face_px
        };
        fill(&mut img, &band, FOREHEAD);
    }
    img
}
