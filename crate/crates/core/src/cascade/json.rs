//! Canonical JSON cascade documents.

use serde::{Deserialize, Serialize};

use super::{Cascade, CascadeError, Stage, WeakClassifier};
use crate::haar::{FeatureKind, HaarFeature, WeightedRect};
use crate::imaging::Rect;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CascadeDoc {
    name: String,
    base_w: u32,
    base_h: u32,
    features: Vec<FeatureDoc>,
    stages: Vec<StageDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureDoc {
    kind: FeatureKind,
    parts: Vec<PartDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartDoc {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageDoc {
    threshold: f64,
    weak: Vec<WeakDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeakDoc {
    feature: usize,
    threshold: f64,
    left: f64,
    right: f64,
}

pub fn parse_cascade(text: &str) -> Result<Cascade, CascadeError> {
    let doc: CascadeDoc = serde_json::from_str(text).map_err(|e| CascadeError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let features = doc
        .features
        .into_iter()
        .map(|f| {
            HaarFeature::new(
                f.kind,
                f.parts
                    .into_iter()
                    .map(|p| WeightedRect {
                        rect: Rect::new(p.x, p.y, p.w, p.h),
                        weight: p.weight,
                    })
                    .collect(),
            )
        })
        .collect();
    let stages = doc
        .stages
        .into_iter()
        .map(|s| Stage {
            threshold: s.threshold,
            weak: s
                .weak
                .into_iter()
                .map(|w| WeakClassifier {
                    feature: w.feature,
                    threshold: w.threshold,
                    left: w.left,
                    right: w.right,
                })
                .collect(),
        })
        .collect();
    Cascade::new(doc.name, doc.base_w, doc.base_h, features, stages)
}

/// Pretty-printed canonical document.
pub fn to_json(c: &Cascade) -> String {
    let doc = CascadeDoc {
        name: c.name().to_owned(),
        base_w: c.base_w(),
        base_h: c.base_h(),
        features: c
            .features()
            .iter()
            .map(|f| FeatureDoc {
                kind: f.kind,
                parts: f
                    .parts
                    .iter()
                    .map(|p| PartDoc {
                        x: p.rect.x,
                        y: p.rect.y,
                        w: p.rect.w,
                        h: p.rect.h,
                        weight: p.weight,
                    })
                    .collect(),
            })
            .collect(),
        stages: c
            .stages()
            .iter()
            .map(|s| StageDoc {
                threshold: s.threshold,
                weak: s
                    .weak
                    .iter()
                    .map(|w| WeakDoc {
                        feature: w.feature,
                        threshold: w.threshold,
                        left: w.left,
                        right: w.right,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("cascade documents always serialize")
}
