#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use uavtrack_core::cascade::{Stage, WeakClassifier, WindowOutcome};
use uavtrack_core::haar::{feature_value, Template};
use uavtrack_core::imaging::{Channel, GrayImage, IntegralPair, Rect};
use uavtrack_core::Cascade;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn random_image(rng: &mut impl Rng, w: u32, h: u32) -> GrayImage {
    GrayImage::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

/// Smooth-ish random image: a few flat blocks over a noise floor, so variance
/// normalization sees structure at every scale.
pub fn blocky_image(rng: &mut impl Rng, w: u32, h: u32) -> GrayImage {
    let mut img = GrayImage::new(w, h, (0..w * h).map(|_| rng.gen_range(90..110)).collect()).unwrap();
    for _ in 0..rng.gen_range(1..8) {
        let rw = rng.gen_range(1..=w);
        let rh = rng.gen_range(1..=h);
        let r = Rect::new(rng.gen_range(0..=w - rw), rng.gen_range(0..=h - rh), rw, rh);
        img.fill_rect(r, rng.gen());
    }
    img
}

pub fn random_cascade(rng: &mut impl Rng, base: u32) -> Cascade {
    let n_features = rng.gen_range(1..12);
    let features = (0..n_features)
        .map(|_| {
            let t = Template::ALL[rng.gen_range(0..5)];
            let (c, r) = t.cells();
            let sw = rng.gen_range(1..=base / c);
            let sh = rng.gen_range(1..=base / r);
            t.instantiate(rng.gen_range(0..=base - c * sw), rng.gen_range(0..=base - r * sh), sw, sh)
        })
        .collect();
    let stages = (0..rng.gen_range(1..8))
        .map(|_| {
            let weak: Vec<WeakClassifier> = (0..rng.gen_range(1..6))
                .map(|_| WeakClassifier {
                    feature: rng.gen_range(0..n_features),
                    threshold: rng.gen_range(-0.3..0.3),
                    left: rng.gen_range(-1.0..1.0),
                    right: rng.gen_range(-1.0..1.0),
                })
                .collect();
            let threshold = rng.gen_range(-0.6..0.2) * weak.len() as f64;
            Stage { weak, threshold }
        })
        .collect();
    Cascade::new("random", base, base, features, stages).unwrap()
}

/// Every stage summed, then the first failing one reported.
pub fn full_evaluation(c: &Cascade, ip: &IntegralPair, window: Rect) -> WindowOutcome {
    let scale = window.w as f64 / c.base_w() as f64;
    let area = window.area() as u128;
    let sum = ip.rect_sum(window, Channel::Plain).unwrap() as u128;
    let sq = ip.rect_sum(window, Channel::Squared).unwrap() as u128;
    let v = (area * sq).saturating_sub(sum * sum);
    let norm = if v == 0 { area as f64 } else { (v as f64).sqrt() };
    let sums: Vec<f64> = c
        .stages()
        .iter()
        .map(|s| {
            s.weak
                .iter()
                .map(|w| {
                    let raw = feature_value(ip, &c.features()[w.feature], window, scale).unwrap();
                    if raw / norm < w.threshold {
                        w.left
                    } else {
                        w.right
                    }
                })
                .sum()
        })
        .collect();
    match c.stages().iter().zip(&sums).position(|(s, &sum)| sum < s.threshold) {
        Some(stage) => WindowOutcome::Reject { stage },
        None => {
            let last = c.stages().len() - 1;
            WindowOutcome::Accept {
                score: sums[last] - c.stages()[last].threshold,
            }
        }
    }
}

/// Stage layout read straight off the XML lines, without an XML parser.
#[derive(Debug, Default, PartialEq)]
pub struct XmlScan {
    pub weak_counts: Vec<usize>,
    pub stage_thresholds: Vec<f64>,
    pub node_thresholds: Vec<f64>,
    pub leaves: Vec<(f64, f64)>,
    pub rect_counts: Vec<usize>,
}

fn inner(line: &str, tag: &str) -> Option<String> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = line.find(&open)? + open.len();
    let end = line.find(&close)?;
    Some(line[start..end].trim().to_owned())
}

pub fn scan_xml(text: &str) -> XmlScan {
    let mut out = XmlScan::default();
    let mut in_stages = false;
    let mut in_features = false;
    let mut pending: Option<&str> = None;
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with("<stages>") {
            in_stages = true;
        } else if t.starts_with("</stages>") {
            in_stages = false;
        } else if t.starts_with("<features>") {
            in_features = true;
        } else if t.starts_with("</features>") {
            in_features = false;
        }
        if let Some(kind) = pending.take() {
            let nums: Vec<f64> = t
                .split('<')
                .next()
                .unwrap()
                .split_whitespace()
                .map(|v| v.parse().unwrap())
                .collect();
            match kind {
                "nodes" => out.node_thresholds.push(nums[3]),
                _ => out.leaves.push((nums[0], nums[1])),
            }
            continue;
        }
        if in_stages {
            if let Some(v) = inner(t, "maxWeakCount") {
                out.weak_counts.push(v.parse().unwrap());
            }
            if let Some(v) = inner(t, "stageThreshold") {
                out.stage_thresholds.push(v.parse().unwrap());
            }
            if t == "<internalNodes>" {
                pending = Some("nodes");
            }
            if t == "<leafValues>" {
                pending = Some("leaves");
            }
        }
        if in_features {
            if t == "<rects>" {
                out.rect_counts.push(0);
            } else if t.ends_with("</_>") && !t.starts_with('<') && t.split_whitespace().count() == 5 {
                *out.rect_counts.last_mut().unwrap() += 1;
            }
        }
    }
    out
}

/// Flat synthetic frame in the simulator's palette: bright background, dark
/// upper body, darker face with a bright band across its second sixth.
pub fn draw_person(img: &mut GrayImage, u: f64, v: f64, dist: f64) {
    use uavtrack_core::sim::{BODY, FACE, FOREHEAD};
    let k = 300.0 / dist;
    let fw = 0.16 * k;
    let top = v - 0.6 * fw;
    fill(img, u - 0.25 * k, top, u + 0.25 * k, top + 0.75 * k, BODY);
    fill(img, u - fw / 2.0, v - fw / 2.0, u + fw / 2.0, v + fw / 2.0, FACE);
    let ft = v - fw / 2.0;
    fill(img, u - fw / 2.0, ft + fw / 6.0, u + fw / 2.0, ft + fw / 3.0, FOREHEAD);
}

pub fn fill(img: &mut GrayImage, l: f64, t: f64, r: f64, b: f64, value: u8) {
    let cx = |v: f64| v.round().clamp(0.0, img.width() as f64) as u32;
    let cy = |v: f64| v.round().clamp(0.0, img.height() as f64) as u32;
    let (l, r, t, b) = (cx(l), cx(r), cy(t), cy(b));
    if r > l && b > t {
        img.fill_rect(Rect::new(l, t, r - l, b - t), value);
    }
}

/// A frame with a few people and random clutter rectangles.
pub fn random_scene(rng: &mut impl Rng) -> GrayImage {
    use uavtrack_core::sim::BACKGROUND;
    let mut img = GrayImage::filled(320, 240, BACKGROUND).unwrap();
    for _ in 0..rng.gen_range(0..4) {
        let w = rng.gen_range(2..80);
        let h = rng.gen_range(2..80);
        let x: f64 = rng.gen_range(0.0..320.0);
        let y: f64 = rng.gen_range(0.0..240.0);
        fill(&mut img, x, y, x + w as f64, y + h as f64, rng.gen());
    }
    for _ in 0..rng.gen_range(0..3) {
        draw_person(
            &mut img,
            rng.gen_range(20.0..300.0),
            rng.gen_range(20.0..200.0),
            rng.gen_range(2.5..8.0),
        );
    }
    img
}
