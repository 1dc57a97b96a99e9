//! Boosted stump cascades: data model, file formats, window evaluation,
//! multi-scale scanning and detection grouping.

mod eval;
mod group;
mod json;
mod legacy;
mod scan;

pub use eval::{ScaledCascade, WindowOutcome};
pub use group::{group_detections, partition, similar, GroupParams};
pub use json::{parse_cascade, to_json};
pub use legacy::import_legacy_xml;
pub use scan::{detect_in_region, detect_multiscale, scan_size, window_sizes, ScanParams};

use thiserror::Error;

use crate::haar::{FeatureError, HaarFeature};
use crate::imaging::Rect;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CascadeError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid cascade at {path}: {message}")]
    Semantic { path: String, message: String },
    #[error("unsupported cascade content at {path}: {message}")]
    Unsupported { path: String, message: String },
    #[error("malformed cascade XML at {path}: {message}")]
    Xml { path: String, message: String },
    #[error("window {window:?} invalid for this cascade: {message}")]
    Window { window: Rect, message: String },
    #[error("feature {feature}: {source}")]
    Feature {
        feature: usize,
        #[source]
        source: FeatureError,
    },
    #[error("invalid scan parameters: {0}")]
    Params(&'static str),
}

fn semantic(path: impl Into<String>, message: impl Into<String>) -> CascadeError {
    CascadeError::Semantic {
        path: path.into(),
        message: message.into(),
    }
}

/// Single-feature threshold stump: emits `left` when the normalized feature
/// value is below `threshold`, `right` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakClassifier {
    pub feature: usize,
    pub threshold: f64,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub weak: Vec<WeakClassifier>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    name: String,
    base_w: u32,
    base_h: u32,
    features: Vec<HaarFeature>,
    stages: Vec<Stage>,
}

impl Cascade {
    pub fn new(
        name: impl Into<String>,
        base_w: u32,
        base_h: u32,
        features: Vec<HaarFeature>,
        stages: Vec<Stage>,
    ) -> Result<Self, CascadeError> {
        if base_w < 4 {
            return Err(semantic("base_w", format!("must be at least 4, got {base_w}")));
        }
        if base_h < 4 {
            return Err(semantic("base_h", format!("must be at least 4, got {base_h}")));
        }
        for (i, f) in features.iter().enumerate() {
            if f.parts.is_empty() {
                return Err(semantic(format!("features[{i}].parts"), "feature has no parts"));
            }
            for (j, p) in f.parts.iter().enumerate() {
                if !p.rect.fits(base_w, base_h) {
                    return Err(semantic(
                        format!("features[{i}].parts[{j}]"),
                        format!("rect {:?} outside the {base_w}x{base_h} base window", p.rect),
                    ));
                }
                if !p.weight.is_finite() {
                    return Err(semantic(format!("features[{i}].parts[{j}].weight"), "not finite"));
                }
            }
        }
        if stages.is_empty() {
            return Err(semantic("stages", "cascade has no stages"));
        }
        for (s, stage) in stages.iter().enumerate() {
            if stage.weak.is_empty() {
                return Err(semantic(format!("stages[{s}].weak"), "stage has no weak classifiers"));
            }
            if stage.threshold.is_nan() {
                return Err(semantic(format!("stages[{s}].threshold"), "not a number"));
            }
            for (k, w) in stage.weak.iter().enumerate() {
                if w.feature >= features.len() {
                    return Err(semantic(
                        format!("stages[{s}].weak[{k}].feature"),
                        format!("index {} but only {} features", w.feature, features.len()),
                    ));
                }
                if w.threshold.is_nan() || !w.left.is_finite() || !w.right.is_finite() {
                    return Err(semantic(format!("stages[{s}].weak[{k}]"), "non-finite value"));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            base_w,
            base_h,
            features,
            stages,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn base_w(&self) -> u32 {
        self.base_w
    }

    pub fn base_h(&self) -> u32 {
        self.base_h
    }

    pub fn features(&self) -> &[HaarFeature] {
        &self.features
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// The cascade cut down to its first `n` stages (at least one).
    pub fn truncated(&self, n: usize) -> Cascade {
        let mut c = self.clone();
        c.stages.truncate(n.max(1));
        c
    }
}

/// A window accepted by a cascade, in image pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: Rect,
    pub stages_passed: usize,
    /// Margin of the final stage sum over its threshold.
    pub score: f64,
    /// Cluster population after grouping; 1 before grouping.
    pub neighbors: usize,
}

impl Detection {
    pub fn new(bbox: Rect, stages_passed: usize, score: f64) -> Self {
        Self {
            bbox,
            stages_passed,
            score,
            neighbors: 1,
        }
    }
}
