//! Import of OpenCV "new-style" HAAR cascade XML (as written by `opencv_traincascade`).

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{Cascade, CascadeError, Stage, WeakClassifier};
use crate::haar::{FeatureKind, HaarFeature, WeightedRect};
use crate::imaging::Rect;

#[derive(Debug, Default)]
struct Node {
    name: String,
    text: String,
    children: Vec<Node>,
}

impl Node {
    fn child(&self, name: &str) -> Option<&Node> {
        self.children.iter().find(|c| c.name == name)
    }

    fn elements(&self) -> impl Iterator<Item = &Node> {
        self.children.iter()
    }
}

fn xml_err(path: &str, message: impl Into<String>) -> CascadeError {
    CascadeError::Xml {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn unsupported(path: &str, message: impl Into<String>) -> CascadeError {
    CascadeError::Unsupported {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn parse_tree(text: &str) -> Result<Node, CascadeError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut stack: Vec<Node> = vec![Node::default()];
    loop {
        let event = reader.read_event().map_err(|e| {
            xml_err(
                &format!("byte {}", reader.buffer_position()),
                e.to_string(),
            )
        })?;
        match event {
            Event::Start(e) => stack.push(Node {
                name: String::from_utf8_lossy(e.name().as_ref()).into_owned(),
                ..Node::default()
            }),
            Event::Empty(e) => {
                let node = Node {
                    name: String::from_utf8_lossy(e.name().as_ref()).into_owned(),
                    ..Node::default()
                };
                stack.last_mut().expect("root").children.push(node);
            }
            Event::Text(e) => {
                let t = e
                    .unescape()
                    .map_err(|err| xml_err(&format!("byte {}", reader.buffer_position()), err.to_string()))?;
                let top = stack.last_mut().expect("root");
                if !top.text.is_empty() {
                    top.text.push(' ');
                }
                top.text.push_str(t.trim());
            }
            Event::End(_) => {
                let node = stack.pop().expect("balanced by reader");
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None => return Err(xml_err("document", "unbalanced end tag")),
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if stack.len() != 1 {
        return Err(xml_err("document", "unclosed element at end of input"));
    }
    Ok(stack.pop().expect("root"))
}

fn required<'a>(node: &'a Node, name: &str, path: &str) -> Result<&'a Node, CascadeError> {
    node.child(name)
        .ok_or_else(|| xml_err(path, format!("missing <{name}>")))
}

fn int_of(node: &Node, path: &str) -> Result<i64, CascadeError> {
    node.text
        .trim()
        .parse()
        .map_err(|_| xml_err(path, format!("expected integer, found {:?}", node.text)))
}

fn real_tokens(node: &Node, path: &str) -> Result<Vec<f64>, CascadeError> {
    node.text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| xml_err(path, format!("expected number, found {t:?}")))
        })
        .collect()
}

/// Imports a stump-based HAAR cascade. Tilted features, non-HAAR feature
/// types and trees deeper than one split are rejected.
pub fn import_legacy_xml(text: &str) -> Result<Cascade, CascadeError> {
    let doc = parse_tree(text)?;
    let storage = doc
        .child("opencv_storage")
        .ok_or_else(|| xml_err("document", "missing <opencv_storage> root"))?;
    let root = storage
        .elements()
        .next()
        .ok_or_else(|| xml_err("opencv_storage", "no cascade element"))?;
    let base = format!("opencv_storage/{}", root.name);

    let feature_type = root.child("featureType").ok_or_else(|| {
        unsupported(&base, "no <featureType>; old-style cascades are not supported")
    })?;
    if feature_type.text.trim() != "HAAR" {
        return Err(unsupported(
            &format!("{base}/featureType"),
            format!("feature type {:?}", feature_type.text),
        ));
    }
    if let Some(st) = root.child("stageType") {
        if st.text.trim() != "BOOST" {
            return Err(unsupported(&format!("{base}/stageType"), format!("stage type {:?}", st.text)));
        }
    }
    let width = int_of(required(root, "width", &base)?, &format!("{base}/width"))?;
    let height = int_of(required(root, "height", &base)?, &format!("{base}/height"))?;
    if !(1..=i64::from(u32::MAX)).contains(&width) || !(1..=i64::from(u32::MAX)).contains(&height) {
        return Err(xml_err(&base, format!("invalid window size {width}x{height}")));
    }

    let stages_path = format!("{base}/stages");
    let stages_node = required(root, "stages", &base)?;
    let mut stages = Vec::new();
    for (s, stage_node) in stages_node.elements().enumerate() {
        let sp = format!("{stages_path}/_[{s}]");
        let declared = int_of(required(stage_node, "maxWeakCount", &sp)?, &format!("{sp}/maxWeakCount"))?;
        let threshold = real_tokens(required(stage_node, "stageThreshold", &sp)?, &format!("{sp}/stageThreshold"))?;
        let [threshold] = threshold[..] else {
            return Err(xml_err(&format!("{sp}/stageThreshold"), "expected one value"));
        };
        let weak_node = required(stage_node, "weakClassifiers", &sp)?;
        let mut weak = Vec::new();
        for (k, wn) in weak_node.elements().enumerate() {
            let wp = format!("{sp}/weakClassifiers/_[{k}]");
            let nodes = real_tokens(required(wn, "internalNodes", &wp)?, &format!("{wp}/internalNodes"))?;
            let leaves = real_tokens(required(wn, "leafValues", &wp)?, &format!("{wp}/leafValues"))?;
            if nodes.len() > 4 || leaves.len() > 2 {
                return Err(unsupported(&wp, "only single-split stumps are supported"));
            }
            if nodes.len() != 4 {
                return Err(xml_err(&format!("{wp}/internalNodes"), "expected 4 values"));
            }
            if leaves.len() != 2 {
                return Err(xml_err(&format!("{wp}/leafValues"), "expected 2 values"));
            }
            let idx = nodes[2];
            if idx < 0.0 || idx.fract() != 0.0 {
                return Err(xml_err(&format!("{wp}/internalNodes"), format!("bad feature index {idx}")));
            }
            weak.push(WeakClassifier {
                feature: idx as usize,
                threshold: nodes[3],
                left: leaves[0],
                right: leaves[1],
            });
        }
        if declared != weak.len() as i64 {
            return Err(xml_err(
                &format!("{sp}/maxWeakCount"),
                format!("declares {declared} weak classifiers, found {}", weak.len()),
            ));
        }
        stages.push(Stage { weak, threshold });
    }
    if let Some(n) = root.child("stageNum") {
        let declared = int_of(n, &format!("{base}/stageNum"))?;
        if declared != stages.len() as i64 {
            return Err(xml_err(
                &format!("{base}/stageNum"),
                format!("declares {declared} stages, found {}", stages.len()),
            ));
        }
    }

    let features_path = format!("{base}/features");
    let features_node = required(root, "features", &base)?;
    let mut features = Vec::new();
    for (i, fnode) in features_node.elements().enumerate() {
        let fp = format!("{features_path}/_[{i}]");
        if let Some(t) = fnode.child("tilted") {
            if int_of(t, &format!("{fp}/tilted"))? != 0 {
                return Err(unsupported(&format!("{fp}/tilted"), "tilted features are not supported"));
            }
        }
        let rects = required(fnode, "rects", &fp)?;
        let mut parts = Vec::new();
        for (j, rn) in rects.elements().enumerate() {
            let rp = format!("{fp}/rects/_[{j}]");
            let v = real_tokens(rn, &rp)?;
            if v.len() != 5 {
                return Err(xml_err(&rp, "expected \"x y w h weight\""));
            }
            if v[..4].iter().any(|c| *c < 0.0 || c.fract() != 0.0) {
                return Err(xml_err(&rp, "rectangle geometry must be non-negative integers"));
            }
            parts.push(WeightedRect {
                rect: Rect::new(v[0] as u32, v[1] as u32, v[2] as u32, v[3] as u32),
                weight: v[4],
            });
        }
        if parts.is_empty() {
            return Err(xml_err(&format!("{fp}/rects"), "feature has no rectangles"));
        }
        features.push(HaarFeature::new(infer_kind(&parts), parts));
    }

    Cascade::new(root.name.clone(), width as u32, height as u32, features, stages)
}

/// OpenCV encodes features as a whole rectangle with weight −1 plus one
/// (edge: half area, line: third area) or two (diagonal) positive rectangles.
fn infer_kind(parts: &[WeightedRect]) -> FeatureKind {
    match parts {
        [whole, inner] if inner.rect.area() * 3 == whole.rect.area() => FeatureKind::ThreeRect,
        [_, _] => FeatureKind::TwoRect,
        _ => FeatureKind::FourRect,
    }
}
