use serde::{Deserialize, Serialize};

use crate::ned::Ned;
use crate::tracker::VelocityCommand;

use super::camera::body_to_ned;

/// Body box top edge sits this many face widths above the face center.
pub const BODY_TOP_ABOVE_FACE_CENTER: f64 = 0.6;

/// Physical extents of the target person in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetGeometry {
    pub face_w: f64,
    pub body_w: f64,
    pub body_h: f64,
}

impl Default for TargetGeometry {
    fn default() -> Self {
        Self {
            face_w: 0.16,
            body_w: 0.5,
            body_h: 0.75,
        }
    }
}

/// Face-center path: from `start` through `waypoints` at constant `speed`,
/// then holding at the last point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetMotion {
    pub start: Ned,
    #[serde(default)]
    pub waypoints: Vec<Ned>,
    #[serde(default = "default_walk_speed")]
    pub speed: f64,
}

fn default_walk_speed() -> f64 {
    0.3
}

impl TargetMotion {
    pub fn fixed(at: Ned) -> Self {
        Self {
            start: at,
            waypoints: Vec::new(),
            speed: default_walk_speed(),
        }
    }

    pub fn position_at(&self, t: f64) -> Ned {
        let mut remaining = (self.speed * t).max(0.0);
        let mut from = self.start;
        for &to in &self.waypoints {
            let leg = (to - from).norm();
            if remaining <= leg {
                if leg == 0.0 {
                    return to;
                }
                return from + (to - from) * (remaining / leg);
            }
            remaining -= leg;
            from = to;
        }
        from
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub drone_pos: Ned,
    pub drone_yaw: f64,
    pub target_pos: Ned,
    pub target_motion: TargetMotion,
    pub geometry: TargetGeometry,
}

impl SimState {
    pub fn new(drone_pos: Ned, drone_yaw: f64, target_motion: TargetMotion, geometry: TargetGeometry) -> Self {
        Self {
            t: 0.0,
            drone_pos,
            drone_yaw,
            target_pos: target_motion.position_at(0.0),
            target_motion,
            geometry,
        }
    }
}

/// First-order kinematics: the body-frame command is realized instantly for
/// `dt`, the target follows its schedule. `dt` must be positive.
pub fn step_sim(s: &SimState, cmd: &VelocityCommand, dt: f64) -> SimState {
    debug_assert!(dt > 0.0);
    let v = body_to_ned(cmd.vx, cmd.vy, cmd.vz, s.drone_yaw);
    let t = s.t + dt;
    SimState {
        t,
        drone_pos: s.drone_pos + v * dt,
        target_pos: s.target_motion.position_at(t),
        ..s.clone()
    }
}

/// Pack voltage over time: linear drain, optionally forced to `low_v` from
/// `low_at_s` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatterySchedule {
    pub initial_v: f64,
    pub drain_v_per_s: f64,
    pub low_at_s: Option<f64>,
    pub low_v: f64,
}

impl Default for BatterySchedule {
    fn default() -> Self {
        Self {
            initial_v: 25.2,
            drain_v_per_s: 0.0,
            low_at_s: None,
            low_v: 20.0,
        }
    }
}

impl BatterySchedule {
    pub fn voltage_at(&self, t: f64) -> f64 {
        if matches!(self.low_at_s, Some(at) if t >= at) {
            return self.low_v.max(0.0);
        }
        (self.initial_v - self.drain_v_per_s * t).max(0.0)
    }
}
