use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::ned::Ned;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MissionPhase {
    Tracking,
    Hover,
    FailsafeAscend,
    FailsafeReturn,
    FailsafeLand,
    Ended,
}

impl MissionPhase {
    pub fn is_failsafe(&self) -> bool {
        matches!(
            self,
            MissionPhase::FailsafeAscend | MissionPhase::FailsafeReturn | MissionPhase::FailsafeLand
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MissionPhase::Tracking => "Tracking",
            MissionPhase::Hover => "Hover",
            MissionPhase::FailsafeAscend => "FailsafeAscend",
            MissionPhase::FailsafeReturn => "FailsafeReturn",
            MissionPhase::FailsafeLand => "FailsafeLand",
            MissionPhase::Ended => "Ended",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionState {
    pub phase: MissionPhase,
    pub home: Ned,
    /// Altitude of the takeoff point, meters.
    pub takeoff_alt: f64,
}

impl MissionState {
    /// Starts tracking with home at the takeoff point.
    pub fn new(home: Ned) -> Self {
        Self {
            phase: MissionPhase::Tracking,
            home,
            takeoff_alt: home.altitude(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleStatus {
    pub battery_voltage: f64,
    pub user_stop: bool,
    pub position: Ned,
    /// Whether the current frame produced a target.
    pub target_visible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionConfig {
    /// Tracking stops below this pack voltage.
    pub batt_min: f64,
    /// Failsafe climb above the takeoff altitude, meters.
    pub failsafe_alt_gain: f64,
    /// Landing completes at or below this height above takeoff.
    pub land_alt_eps: f64,
    /// Position tolerance for the climb and return legs.
    pub pos_eps: f64,
    pub climb_speed: f64,
    pub return_speed: f64,
    pub land_speed: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            batt_min: 21.0,
            failsafe_alt_gain: 5.0,
            land_alt_eps: 0.1,
            pos_eps: 0.2,
            climb_speed: 1.0,
            return_speed: 2.0,
            land_speed: 0.5,
        }
    }
}

impl MissionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            self.failsafe_alt_gain,
            self.land_alt_eps,
            self.pos_eps,
            self.climb_speed,
            self.return_speed,
            self.land_speed,
        ];
        if !self.batt_min.is_finite() || positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(ConfigError("mission values must be finite and positive".into()));
        }
        Ok(())
    }
}

/// Order for the flight layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Directive {
    /// Follow the tracker's velocity command.
    Track,
    /// Zero velocity.
    Hover,
    /// Fly toward a NED position at no more than `max_speed`.
    GoTo { target: Ned, max_speed: f64 },
    /// Mission over; nothing to command.
    Idle,
}

/// One tick of the tracking/failsafe automaton.
///
/// Low battery or a user stop moves Tracking/Hover into the failsafe
/// sequence: climb to takeoff altitude + `failsafe_alt_gain` over the current
/// spot, fly home at that height, then descend. Failsafe phases never return
/// to tracking and `Ended` is absorbing.
pub fn step_mission(s: &MissionState, status: &VehicleStatus, cfg: &MissionConfig) -> (MissionState, Directive) {
    let safe_alt = s.takeoff_alt + cfg.failsafe_alt_gain;
    let pos = status.position;
    let climb = |pos: Ned| Directive::GoTo {
        target: Ned::new(pos.n, pos.e, -safe_alt),
        max_speed: cfg.climb_speed,
    };
    let go_home = Directive::GoTo {
        target: Ned::new(s.home.n, s.home.e, -safe_alt),
        max_speed: cfg.return_speed,
    };
    let land = Directive::GoTo {
        target: Ned::new(s.home.n, s.home.e, -s.takeoff_alt),
        max_speed: cfg.land_speed,
    };
    let next = |phase| MissionState { phase, ..*s };

    match s.phase {
        MissionPhase::Tracking | MissionPhase::Hover => {
            if status.battery_voltage < cfg.batt_min || status.user_stop {
                (next(MissionPhase::FailsafeAscend), climb(pos))
            } else if status.target_visible {
                (next(MissionPhase::Tracking), Directive::Track)
            } else {
                (next(MissionPhase::Hover), Directive::Hover)
            }
        }
        MissionPhase::FailsafeAscend => {
            if (pos.altitude() - safe_alt).abs() <= cfg.pos_eps {
                (next(MissionPhase::FailsafeReturn), go_home)
            } else {
                (*s, climb(pos))
            }
        }
        MissionPhase::FailsafeReturn => {
            if pos.horizontal_distance(&s.home) <= cfg.pos_eps {
                (next(MissionPhase::FailsafeLand), land)
            } else {
                (*s, go_home)
            }
        }
        MissionPhase::FailsafeLand => {
            if pos.altitude() - s.takeoff_alt <= cfg.land_alt_eps {
                (next(MissionPhase::Ended), Directive::Idle)
            } else {
                (*s, land)
            }
        }
        MissionPhase::Ended => (*s, Directive::Idle),
    }
}
