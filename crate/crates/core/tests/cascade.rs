mod common;

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavtrack_core::cascade::{
    detect_in_region, detect_multiscale, group_detections, import_legacy_xml, parse_cascade, partition, scan_size,
    to_json, window_sizes, CascadeError, ScanParams, Stage, WeakClassifier, WindowOutcome,
};
use uavtrack_core::haar::Template;
use uavtrack_core::imaging::{GrayImage, IntegralPair, Rect};
use uavtrack_core::sim::{render_scene, scene_cascades, BACKGROUND};
use uavtrack_core::{Cascade, Detection};

use common::{blocky_image, fixture, full_evaluation, random_cascade, scan_xml};

fn stump_cascade(stage_threshold: f64) -> Cascade {
    Cascade::new(
        "stump",
        24,
        24,
        vec![Template::EdgeHorizontal.instantiate(0, 0, 12, 24)],
        vec![Stage {
            weak: vec![WeakClassifier {
                feature: 0,
                threshold: 0.0,
                left: -1.0,
                right: 1.0,
            }],
            threshold: stage_threshold,
        }],
    )
    .unwrap()
}

fn outcome_kind(o: WindowOutcome) -> Option<usize> {
    match o {
        WindowOutcome::Accept { .. } => None,
        WindowOutcome::Reject { stage } => Some(stage),
    }
}

#[test]
fn early_exit_agrees_with_full_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..400 {
        let base = if rng.gen() { 20 } else { 24 };
        let c = random_cascade(&mut rng, base);
        let img = blocky_image(&mut rng, 96, 80);
        let ip = IntegralPair::new(&img);
        let w = rng.gen_range(base..=72);
        let window = Rect::new(rng.gen_range(0..=96 - w), rng.gen_range(0..=80 - w), w, w);
        let fast = c.eval_window(&ip, window).unwrap();
        let full = full_evaluation(&c, &ip, window);
        assert_eq!(outcome_kind(fast), outcome_kind(full));
        if let (WindowOutcome::Accept { score: a }, WindowOutcome::Accept { score: b }) = (fast, full) {
            assert_eq!(a, b);
        }
    }
}

#[test]
fn truncation_never_rejects_later() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let c = random_cascade(&mut rng, 20);
        let img = blocky_image(&mut rng, 40, 40);
        let ip = IntegralPair::new(&img);
        let window = Rect::new(rng.gen_range(0..=20), rng.gen_range(0..=20), 20, 20);
        if let WindowOutcome::Reject { stage } = c.eval_window(&ip, window).unwrap() {
            for n in 1..=c.stages().len() {
                let t = c.truncated(n).eval_window(&ip, window).unwrap();
                if n <= stage {
                    assert!(t.is_accept());
                } else {
                    assert_eq!(t, WindowOutcome::Reject { stage });
                }
            }
        }
    }
}

#[test]
fn vacuous_and_unsatisfiable_stages() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let img = common::random_image(&mut rng, 48, 48);
    let ip = IntegralPair::new(&img);
    let w = Rect::new(5, 7, 30, 30);
    assert!(stump_cascade(-1e9).eval_window(&ip, w).unwrap().is_accept());
    assert_eq!(stump_cascade(1.5).eval_window(&ip, w).unwrap(), WindowOutcome::Reject { stage: 0 });
    let blank = GrayImage::filled(64, 64, 0).unwrap();
    assert!(detect_multiscale(&stump_cascade(1.5), &blank, &ScanParams::default()).unwrap().is_empty());
}

#[test]
fn vacuous_scan_visits_every_grid_position() {
    let img = GrayImage::filled(64, 64, 10).unwrap();
    let p = ScanParams {
        scale_factor: 1.25,
        min_size: 24,
        max_size: Some(64),
        step_divisor: 24.0,
    };
    let got = detect_multiscale(&stump_cascade(-1e9), &img, &p).unwrap();
    let mut expect = 0;
    let mut k = 0;
    loop {
        let w = (24.0 * 1.25f64.powi(k)).round() as u32;
        if w > 64 {
            break;
        }
        let stride = ((w as f64 / 24.0).round() as u32).max(1);
        let per_axis = (64 - w) / stride + 1;
        expect += per_axis * per_axis;
        k += 1;
    }
    assert_eq!(got.len() as u32, expect);
    // deterministic order: scale ascending, then y, then x
    let keys: Vec<(u32, u32, u32)> = got.iter().map(|d| (d.bbox.w, d.bbox.y, d.bbox.x)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn translated_content_translates_detections() {
    let cam = uavtrack_core::sim::CameraModel {
        img_w: 200,
        img_h: 160,
        focal: 300.0,
    };
    let s = uavtrack_core::sim::SimState::new(
        uavtrack_core::Ned::default(),
        0.0,
        uavtrack_core::sim::TargetMotion::fixed(uavtrack_core::Ned::new(4.0, 0.3, -0.2)),
        Default::default(),
    );
    let frame = render_scene(uavtrack_core::sim::project_target(&s, &cam).as_ref(), &cam);
    let mut padded = GrayImage::filled(208, 168, BACKGROUND).unwrap();
    for y in 0..160 {
        for x in 0..200 {
            padded.set(x + 8, y + 8, frame.get(x, y));
        }
    }
    let body = scene_cascades().body;
    let p = ScanParams {
        scale_factor: 1.1,
        min_size: 0,
        max_size: Some(150),
        step_divisor: 1000.0,
    };
    let a: BTreeSet<(u32, u32, u32)> =
        detect_multiscale(&body, &frame, &p).unwrap().iter().map(|d| (d.bbox.x + 8, d.bbox.y + 8, d.bbox.w)).collect();
    let b: BTreeSet<(u32, u32, u32)> = detect_multiscale(&body, &padded, &p)
        .unwrap()
        .iter()
        .filter(|d| d.bbox.x >= 8 && d.bbox.y >= 8 && d.bbox.right() <= 208 && d.bbox.bottom() <= 168)
        .map(|d| (d.bbox.x, d.bbox.y, d.bbox.w))
        .collect();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn scan_order_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = scene_cascades().body;
    for _ in 0..5 {
        let img = common::random_scene(&mut rng);
        let ip = IntegralPair::new(&img);
        let p = ScanParams::default();
        let forward = detect_in_region(&c, &ip, img.bounds(), &p).unwrap();
        let mut sizes = window_sizes(&c, img.width(), img.height(), &p);
        sizes.reverse();
        let mut backward = Vec::new();
        for s in sizes {
            backward.extend(scan_size(&c, &ip, img.bounds(), s, p.stride(s.0)).unwrap());
        }
        let key = |d: &Detection| (d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h);
        let f: HashSet<_> = forward.iter().map(key).collect();
        let b: HashSet<_> = backward.iter().map(key).collect();
        assert_eq!(f, b);
    }
}

fn similar_oracle(a: &Rect, b: &Rect, eps: f64) -> bool {
    let mean = (a.w + a.h + b.w + b.h) as f64 / 4.0;
    [(a.x, b.x), (a.y, b.y), (a.w, b.w), (a.h, b.h)]
        .iter()
        .all(|&(p, q)| (p as f64 - q as f64).abs() <= eps * mean)
}

fn components_oracle(rects: &[Rect], eps: f64) -> BTreeSet<BTreeSet<usize>> {
    let mut seen = vec![false; rects.len()];
    let mut out = BTreeSet::new();
    for start in 0..rects.len() {
        if seen[start] {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.insert(i);
            for j in 0..rects.len() {
                if !seen[j] && similar_oracle(&rects[i], &rects[j], eps) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        out.insert(comp);
    }
    out
}

fn clustered_rects() -> impl Strategy<Value = Vec<Rect>> {
    proptest::collection::vec((0u32..200, 0u32..200, 10u32..60), 1..6).prop_flat_map(|centers| {
        let per: Vec<_> = centers
            .into_iter()
            .map(|(x, y, s)| {
                proptest::collection::vec((0u32..8, 0u32..8, 0u32..6), 1..6)
                    .prop_map(move |js| js.into_iter().map(|(dx, dy, ds)| Rect::new(x + dx, y + dy, s + ds, s + ds)).collect::<Vec<_>>())
            })
            .collect();
        per.prop_map(|v| v.into_iter().flatten().collect())
    })
}

proptest! {
    #[test]
    fn partition_matches_graph_components(rects in clustered_rects(), eps in 0.05f64..0.5) {
        let got: BTreeSet<BTreeSet<usize>> =
            partition(&rects, eps).into_iter().map(|g| g.into_iter().collect()).collect();
        prop_assert_eq!(got, components_oracle(&rects, eps));
    }

    #[test]
    fn grouped_boxes_stay_within_their_members(rects in clustered_rects(), min_neighbors in 0usize..4) {
        let dets: Vec<Detection> = rects.iter().map(|&r| Detection::new(r, 1, 0.0)).collect();
        let groups = partition(&rects, 0.2);
        let kept: Vec<&Vec<usize>> = groups.iter().filter(|g| g.len() > min_neighbors).collect();
        let out = group_detections(&dets, min_neighbors, 0.2);
        prop_assert_eq!(out.len(), kept.len());
        for (d, g) in out.iter().zip(kept) {
            prop_assert_eq!(d.neighbors, g.len());
            let lo_x = g.iter().map(|&i| rects[i].x).min().unwrap();
            let lo_y = g.iter().map(|&i| rects[i].y).min().unwrap();
            let hi_r = g.iter().map(|&i| rects[i].right()).max().unwrap();
            let hi_b = g.iter().map(|&i| rects[i].bottom()).max().unwrap();
            prop_assert!(d.bbox.x >= lo_x && d.bbox.y >= lo_y && d.bbox.right() <= hi_r && d.bbox.bottom() <= hi_b);
        }
    }

    #[test]
    fn json_roundtrip_of_random_cascades(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_cascade(&mut rng, 24);
        let text = to_json(&c);
        let back = parse_cascade(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(to_json(&back), text);
    }
}

#[test]
fn identical_boxes_collapse() {
    let r = Rect::new(10, 20, 30, 30);
    let dets = vec![Detection::new(r, 1, 0.0); 4];
    let out = group_detections(&dets, 3, 0.2);
    assert_eq!(out.len(), 1);
    assert_eq!((out[0].bbox, out[0].neighbors), (r, 4));
    assert!(group_detections(&dets, 4, 0.2).is_empty());
}

#[test]
fn dissimilar_boxes_pass_through() {
    let dets: Vec<Detection> =
        (0..4).map(|i| Detection::new(Rect::new(i * 50, 0, 20, 20), 1, 0.0)).collect();
    let out = group_detections(&dets, 0, 0.2);
    assert_eq!(out.iter().map(|d| d.bbox).collect::<Vec<_>>(), dets.iter().map(|d| d.bbox).collect::<Vec<_>>());
    assert!(out.iter().all(|d| d.neighbors == 1));
}

const MINIMAL: &str = r#"{
  "name": "one",
  "base_w": 4,
  "base_h": 4,
  "features": [{"kind": "two_rect", "parts": [{"x": 0, "y": 0, "w": 2, "h": 4, "weight": 1.0}, {"x": 2, "y": 0, "w": 2, "h": 4, "weight": -1.0}]}],
  "stages": [{"threshold": 0.5, "weak": [{"feature": 0, "threshold": 0.1, "left": -1.0, "right": 1.0}]}]
}"#;

#[test]
fn minimal_document() {
    let c = parse_cascade(MINIMAL).unwrap();
    assert_eq!((c.stages().len(), c.stages()[0].weak.len(), c.features().len()), (1, 1, 1));
}

#[test]
fn bad_feature_index_names_the_stage() {
    let doc = MINIMAL.replace(r#""feature": 0"#, r#""feature": 1"#);
    match parse_cascade(&doc) {
        Err(CascadeError::Semantic { path, .. }) => assert_eq!(path, "stages[0].weak[0].feature"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let doc = MINIMAL.replace(r#""base_w": 4,"#, r#""base_w": 4, "extra": 1,"#);
    assert!(matches!(parse_cascade(&doc), Err(CascadeError::Syntax { .. })));
}

#[test]
fn fixture_json_reserializes_to_the_same_document() {
    for name in ["body.json", "face.json"] {
        let text = std::fs::read_to_string(fixture("cascades").join(name)).unwrap();
        let c = parse_cascade(&text).unwrap();
        let original: serde_json::Value = serde_json::from_str(&text).unwrap();
        let again: serde_json::Value = serde_json::from_str(&to_json(&c)).unwrap();
        assert_eq!(original, again, "{name}");
    }
}

#[test]
fn legacy_fixtures_match_text_scan() {
    for (name, base, stages) in [("legacy_20x20.xml", 20, 10), ("legacy_24x24.xml", 24, 6)] {
        let text = std::fs::read_to_string(fixture("cascades").join(name)).unwrap();
        let scan = scan_xml(&text);
        let c = import_legacy_xml(&text).unwrap();
        assert_eq!((c.base_w(), c.base_h(), c.stages().len()), (base, base, stages));
        assert_eq!(c.stages().iter().map(|s| s.weak.len()).collect::<Vec<_>>(), scan.weak_counts);
        assert_eq!(c.stages().iter().map(|s| s.threshold).collect::<Vec<_>>(), scan.stage_thresholds);
        let weak: Vec<&WeakClassifier> = c.stages().iter().flat_map(|s| &s.weak).collect();
        assert_eq!(weak.iter().map(|w| w.threshold).collect::<Vec<_>>(), scan.node_thresholds);
        assert_eq!(weak.iter().map(|w| (w.left, w.right)).collect::<Vec<_>>(), scan.leaves);
        assert_eq!(c.features().iter().map(|f| f.parts.len()).collect::<Vec<_>>(), scan.rect_counts);

        let json = to_json(&c);
        let back = parse_cascade(&json).unwrap();
        assert_eq!(back, c);
        assert_eq!(to_json(&back), json);
    }
}

#[test]
fn legacy_rejects_tilted_and_foreign_types() {
    let text = std::fs::read_to_string(fixture("cascades/legacy_20x20.xml")).unwrap();
    let tilted = text.replacen("</rects></_>", "</rects>\n      <tilted>1</tilted></_>", 1);
    assert!(matches!(import_legacy_xml(&tilted), Err(CascadeError::Unsupported { .. })));
    let lbp = text.replace("<featureType>HAAR</featureType>", "<featureType>LBP</featureType>");
    assert!(matches!(import_legacy_xml(&lbp), Err(CascadeError::Unsupported { .. })));
}
