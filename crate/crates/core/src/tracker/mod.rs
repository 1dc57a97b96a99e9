//! Image-zone classification of the target centroid and banded velocity
//! commands, plus the tracking/failsafe mission automaton.

mod mission;

pub use mission::{step_mission, Directive, MissionConfig, MissionPhase, MissionState, VehicleStatus};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gated::GatedDetection;
use crate::imaging::Rect;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

/// Which box sets the standoff distance through its width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeSource {
    Body,
    Face,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// Normalized half-width of the dead zone.
    pub dead_zone: f64,
    /// Normalized error beyond which the fast band applies.
    pub fast_threshold: f64,
    pub roll_s: f64,
    pub roll_f: f64,
    pub th_s: f64,
    pub th_f: f64,
    pub fwd_speed: f64,
    /// Advance while the range box is narrower than this fraction of the image.
    pub width_far: f64,
    /// Retreat (if allowed) while the range box is wider than this fraction.
    pub width_near: f64,
    pub allow_backward: bool,
    pub loop_dt: f64,
    pub range_source: RangeSource,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            dead_zone: 0.15,
            fast_threshold: 0.5,
            roll_s: 0.3,
            roll_f: 0.8,
            th_s: 0.2,
            th_f: 0.5,
            fwd_speed: 0.4,
            width_far: 0.10,
            width_near: 0.18,
            allow_backward: false,
            loop_dt: 0.25,
            range_source: RangeSource::Body,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: &str| Err(ConfigError(m.to_owned()));
        let all_finite = [
            self.dead_zone,
            self.fast_threshold,
            self.roll_s,
            self.roll_f,
            self.th_s,
            self.th_f,
            self.fwd_speed,
            self.width_far,
            self.width_near,
            self.loop_dt,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return err("tracker values must be finite");
        }
        if !(0.0 < self.dead_zone && self.dead_zone < self.fast_threshold && self.fast_threshold <= 1.0) {
            return err("need 0 < dead_zone < fast_threshold <= 1");
        }
        if !(0.0 < self.roll_s && self.roll_s <= self.roll_f) {
            return err("need 0 < roll_s <= roll_f");
        }
        if !(0.0 < self.th_s && self.th_s <= self.th_f) {
            return err("need 0 < th_s <= th_f");
        }
        if self.fwd_speed < 0.0 {
            return err("fwd_speed must be non-negative");
        }
        if !(0.0 < self.width_far && self.width_far < self.width_near && self.width_near < 1.0) {
            return err("need 0 < width_far < width_near < 1");
        }
        if self.loop_dt <= 0.0 {
            return err("loop_dt must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Horizontal {
    Center,
    SlowL,
    SlowR,
    FastL,
    FastR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vertical {
    Center,
    SlowU,
    SlowD,
    FastU,
    FastD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Zone {
    pub horiz: Horizontal,
    pub vert: Vertical,
}

impl Zone {
    pub fn is_center(&self) -> bool {
        self.horiz == Horizontal::Center && self.vert == Vertical::Center
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Band {
    Center,
    Slow,
    Fast,
}

fn band(e: f64, cfg: &TrackerConfig) -> Band {
    let m = e.abs();
    if m <= cfg.dead_zone {
        Band::Center
    } else if m <= cfg.fast_threshold {
        Band::Slow
    } else {
        Band::Fast
    }
}

/// Centroid error normalized to [-1, 1] on each axis; +x right, +y down.
pub fn normalized_error(centroid: (f64, f64), img_w: u32, img_h: u32) -> (f64, f64) {
    let (hw, hh) = (img_w as f64 / 2.0, img_h as f64 / 2.0);
    ((centroid.0 - hw) / hw, (centroid.1 - hh) / hh)
}

pub fn classify_zone(centroid: (f64, f64), img_w: u32, img_h: u32, cfg: &TrackerConfig) -> Zone {
    let (ex, ey) = normalized_error(centroid, img_w, img_h);
    let horiz = match (band(ex, cfg), ex > 0.0) {
        (Band::Center, _) => Horizontal::Center,
        (Band::Slow, false) => Horizontal::SlowL,
        (Band::Slow, true) => Horizontal::SlowR,
        (Band::Fast, false) => Horizontal::FastL,
        (Band::Fast, true) => Horizontal::FastR,
    };
    let vert = match (band(ey, cfg), ey > 0.0) {
        (Band::Center, _) => Vertical::Center,
        (Band::Slow, false) => Vertical::SlowU,
        (Band::Slow, true) => Vertical::SlowD,
        (Band::Fast, false) => Vertical::FastU,
        (Band::Fast, true) => Vertical::FastD,
    };
    Zone { horiz, vert }
}

/// Body-frame velocity in m/s: +x forward, +y right, +z down.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl VelocityCommand {
    pub const ZERO: VelocityCommand = VelocityCommand {
        vx: 0.0,
        vy: 0.0,
        vz: 0.0,
    };

    pub fn new(vx: f64, vy: f64, vz: f64) -> Self {
        Self { vx, vy, vz }
    }

    pub fn is_zero(&self) -> bool {
        self.vx == 0.0 && self.vy == 0.0 && self.vz == 0.0
    }
}

/// What the tracker steers on: the box whose centroid is centered and the box
/// whose width regulates distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackTarget {
    pub centroid: Rect,
    pub range: Rect,
}

impl TrackTarget {
    pub fn single(bbox: Rect) -> Self {
        Self {
            centroid: bbox,
            range: bbox,
        }
    }

    /// Centers the face; the range box comes from `source`.
    pub fn from_gated(g: &GatedDetection, source: RangeSource) -> Self {
        Self {
            centroid: g.face.bbox,
            range: match source {
                RangeSource::Body => g.body.bbox,
                RangeSource::Face => g.face.bbox,
            },
        }
    }
}

/// Banded velocity command; hover (all zero) when no target is present.
pub fn compute_command(target: Option<&TrackTarget>, img_w: u32, img_h: u32, cfg: &TrackerConfig) -> VelocityCommand {
    let Some(t) = target else {
        return VelocityCommand::ZERO;
    };
    let zone = classify_zone(t.centroid.center(), img_w, img_h, cfg);
    let vy = match zone.horiz {
        Horizontal::Center => 0.0,
        Horizontal::SlowL => -cfg.roll_s,
        Horizontal::SlowR => cfg.roll_s,
        Horizontal::FastL => -cfg.roll_f,
        Horizontal::FastR => cfg.roll_f,
    };
    let vz = match zone.vert {
        Vertical::Center => 0.0,
        Vertical::SlowU => -cfg.th_s,
        Vertical::SlowD => cfg.th_s,
        Vertical::FastU => -cfg.th_f,
        Vertical::FastD => cfg.th_f,
    };
    let ratio = t.range.w as f64 / img_w as f64;
    let vx = if ratio < cfg.width_far {
        cfg.fwd_speed
    } else if cfg.allow_backward && ratio > cfg.width_near {
        -cfg.fwd_speed
    } else {
        0.0
    };
    VelocityCommand { vx, vy, vz }
}
