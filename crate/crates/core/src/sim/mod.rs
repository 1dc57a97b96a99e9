//! Closed-loop desk simulation: kinematic vehicle, pinhole camera, synthetic
//! person, oracle or rendered detection, per-tick trace.

mod camera;
mod scene;
mod world;

pub use camera::{body_to_ned, ned_to_body, project_target, CameraModel, PixelBox, Projection, MIN_FORWARD};
pub use scene::{render_scene, scene_cascades, CascadePair, BACKGROUND, BODY, FACE, FOREHEAD};
pub use world::{step_sim, BatterySchedule, SimState, TargetGeometry, TargetMotion, BODY_TOP_ABOVE_FACE_CENTER};

use std::io;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::{CascadeError, Detection, GroupParams, ScanParams};
use crate::gated::{detect_gated, select_target, GateParams, GatedDetection};
use crate::imaging::{GrayImage, Rect};
use crate::mavlink::{build_velocity_message, CommandSink, NonFiniteVelocity, SinkError};
use crate::ned::Ned;
use crate::tracker::{
    classify_zone, compute_command, step_mission, Directive, MissionConfig, MissionPhase, MissionState,
    TrackTarget, TrackerConfig, VehicleStatus, VelocityCommand, Zone,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// Projected boxes used directly as the detection.
    Oracle,
    /// Rasterized scene run through gated cascade detection.
    Rendered,
}

/// Cascade file locations for rendered runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeFiles {
    pub body: PathBuf,
    pub face: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub mode: DetectionMode,
    pub ticks: usize,
    pub camera: CameraModel,
    pub geometry: TargetGeometry,
    pub drone_start: Ned,
    pub drone_yaw: f64,
    /// Takeoff point; defaults to the ground point below `drone_start`.
    pub home: Option<Ned>,
    pub target: TargetMotion,
    pub battery: BatterySchedule,
    /// Time at which the operator stop is raised.
    pub user_stop_at_s: Option<f64>,
    pub tracker: TrackerConfig,
    pub mission: MissionConfig,
    pub gate: GateParams,
    pub cascades: Option<CascadeFiles>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mode: DetectionMode::Oracle,
            ticks: 120,
            camera: CameraModel::default(),
            geometry: TargetGeometry::default(),
            drone_start: Ned::new(0.0, 0.0, -2.0),
            drone_yaw: 0.0,
            home: None,
            target: TargetMotion::fixed(Ned::new(6.5, 1.5, -1.6)),
            battery: BatterySchedule::default(),
            user_stop_at_s: None,
            tracker: TrackerConfig::default(),
            mission: MissionConfig::default(),
            gate: scene_gate_params(),
            cascades: None,
        }
    }
}

/// Scan and grouping settings matched to the bundled scene cascades.
pub fn scene_gate_params() -> GateParams {
    GateParams {
        body_scan: ScanParams {
            scale_factor: 1.05,
            min_size: 0,
            max_size: None,
            step_divisor: 20.0,
        },
        face_scan: ScanParams {
            scale_factor: 1.1,
            min_size: 0,
            max_size: None,
            step_divisor: 12.0,
        },
        body_group: GroupParams {
            min_neighbors: 1,
            eps: 0.2,
        },
        face_group: GroupParams {
            min_neighbors: 0,
            eps: 0.2,
        },
        face_min_fraction: 0.2,
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(transparent)]
    Sink(#[from] SinkError),
    #[error(transparent)]
    Command(#[from] NonFiniteVelocity),
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let cfg = |e: &dyn std::fmt::Display| SimError::Config(e.to_string());
        self.tracker.validate().map_err(|e| cfg(&e))?;
        self.mission.validate().map_err(|e| cfg(&e))?;
        self.gate.validate().map_err(|e| cfg(&e))?;
        let c = &self.camera;
        if c.img_w == 0 || c.img_h == 0 || !(c.focal.is_finite() && c.focal > 0.0) {
            return Err(SimError::Config("camera needs a nonzero size and positive focal length".into()));
        }
        let g = &self.geometry;
        if !(g.face_w > 0.0 && g.body_w > g.face_w && g.body_h > g.face_w * (0.5 + BODY_TOP_ABOVE_FACE_CENTER)) {
            return Err(SimError::Config("face must fit inside the upper body".into()));
        }
        if !(self.target.speed.is_finite() && self.target.speed >= 0.0) {
            return Err(SimError::Config("target speed must be finite and non-negative".into()));
        }
        if self.battery.initial_v < 0.0 || self.battery.low_v < 0.0 {
            return Err(SimError::Config("battery voltages must be non-negative".into()));
        }
        Ok(())
    }

    pub fn home(&self) -> Ned {
        self.home
            .unwrap_or(Ned::new(self.drone_start.n, self.drone_start.e, 0.0))
    }

    pub fn initial_state(&self) -> SimState {
        SimState::new(self.drone_start, self.drone_yaw, self.target.clone(), self.geometry)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub tick: usize,
    pub t: f64,
    pub drone: Ned,
    pub target: Ned,
    pub battery_v: f64,
    pub detected: bool,
    /// All gated detections of this tick.
    pub detections: Vec<GatedDetection>,
    pub face: Option<Rect>,
    pub body: Option<Rect>,
    pub centroid: Option<(f64, f64)>,
    /// Width of the box that regulates range.
    pub bbox_w_px: Option<u32>,
    pub zone: Option<Zone>,
    /// Velocity actually applied, body frame.
    pub command: VelocityCommand,
    pub phase: MissionPhase,
    pub frame_sent: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: [&str; 28] = [
    "tick",
    "t",
    "drone_n",
    "drone_e",
    "drone_d",
    "target_n",
    "target_e",
    "target_d",
    "battery_v",
    "detected",
    "centroid_u",
    "centroid_v",
    "face_x",
    "face_y",
    "face_w",
    "face_h",
    "body_x",
    "body_y",
    "body_w",
    "body_h",
    "bbox_w_px",
    "zone_h",
    "zone_v",
    "vx",
    "vy",
    "vz",
    "mission_state",
    "frame_sent",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn rect_fields(r: Option<Rect>) -> [String; 4] {
    match r {
        Some(r) => [r.x.to_string(), r.y.to_string(), r.w.to_string(), r.h.to_string()],
        None => Default::default(),
    }
}

impl Trace {
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_HEADER)?;
        for r in &self.rows {
            let mut rec = vec![
                r.tick.to_string(),
                r.t.to_string(),
                r.drone.n.to_string(),
                r.drone.e.to_string(),
                r.drone.d.to_string(),
                r.target.n.to_string(),
                r.target.e.to_string(),
                r.target.d.to_string(),
                r.battery_v.to_string(),
                (r.detected as u8).to_string(),
                opt(r.centroid.map(|c| c.0)),
                opt(r.centroid.map(|c| c.1)),
            ];
            rec.extend(rect_fields(r.face));
            rec.extend(rect_fields(r.body));
            rec.push(opt(r.bbox_w_px));
            rec.push(opt(r.zone.map(|z| format!("{:?}", z.horiz))));
            rec.push(opt(r.zone.map(|z| format!("{:?}", z.vert))));
            rec.push(r.command.vx.to_string());
            rec.push(r.command.vy.to_string());
            rec.push(r.command.vz.to_string());
            rec.push(r.phase.as_str().to_owned());
            rec.push((r.frame_sent as u8).to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Whether the last `n` rows all see the target centered with the range
    /// box inside the standoff band.
    pub fn converged(&self, n: usize, tracker: &TrackerConfig, img_w: u32) -> bool {
        self.rows.len() >= n
            && self.rows[self.rows.len() - n..].iter().all(|r| {
                let ratio = r.bbox_w_px.map(|w| w as f64 / img_w as f64);
                r.detected
                    && r.zone.is_some_and(|z| z.is_center())
                    && ratio.is_some_and(|q| q >= tracker.width_far && q <= tracker.width_near)
            })
    }
}

/// What an observer sees each tick, before the vehicle moves.
pub struct TickView<'a> {
    pub tick: usize,
    pub state: &'a SimState,
    /// Rendered frame, in rendered mode.
    pub frame: Option<&'a GrayImage>,
    pub detections: &'a [GatedDetection],
}

pub fn run_closed_loop(
    cfg: &SimConfig,
    cascades: Option<&CascadePair>,
    sink: Option<&mut CommandSink>,
) -> Result<Trace, SimError> {
    run_closed_loop_observed(cfg, cascades, sink, &mut |_| {})
}

/// Sense, decide, act, integrate once per `tracker.loop_dt` until `ticks`
/// rows are logged or the mission ends. A frame goes to `sink` on every tick
/// spent tracking or hovering.
pub fn run_closed_loop_observed(
    cfg: &SimConfig,
    cascades: Option<&CascadePair>,
    mut sink: Option<&mut CommandSink>,
    observer: &mut dyn FnMut(&TickView<'_>),
) -> Result<Trace, SimError> {
    cfg.validate()?;
    if cfg.mode == DetectionMode::Rendered && cascades.is_none() {
        return Err(SimError::Config("rendered mode needs body and face cascades".into()));
    }
    let dt = cfg.tracker.loop_dt;
    let cam = &cfg.camera;
    let mut state = cfg.initial_state();
    let mut mission = MissionState::new(cfg.home());
    let mut trace = Trace::default();

    for tick in 0..cfg.ticks {
        let sensing = matches!(mission.phase, MissionPhase::Tracking | MissionPhase::Hover);
        let mut frame = None;
        let detections: Vec<GatedDetection> = if !sensing {
            Vec::new()
        } else {
            let proj = project_target(&state, cam);
            match (cfg.mode, cascades) {
                (DetectionMode::Oracle, _) => proj
                    .map(|p| GatedDetection {
                        body: Detection::new(p.body, 0, 0.0),
                        face: Detection::new(p.face, 0, 0.0),
                    })
                    .into_iter()
                    .collect(),
                (DetectionMode::Rendered, Some(c)) => {
                    let img = render_scene(proj.as_ref(), cam);
                    let found = detect_gated(&c.body, &c.face, &img, &cfg.gate)?;
                    frame = Some(img);
                    found
                }
                (DetectionMode::Rendered, None) => unreachable!("checked above"),
            }
        };
        observer(&TickView {
            tick,
            state: &state,
            frame: frame.as_ref(),
            detections: &detections,
        });

        let chosen = select_target(&detections);
        let target = chosen.map(|g| TrackTarget::from_gated(&g, cfg.tracker.range_source));
        let track_cmd = compute_command(target.as_ref(), cam.img_w, cam.img_h, &cfg.tracker);

        let status = VehicleStatus {
            battery_voltage: cfg.battery.voltage_at(state.t),
            user_stop: cfg.user_stop_at_s.is_some_and(|at| state.t >= at),
            position: state.drone_pos,
            target_visible: target.is_some(),
        };
        let (next_mission, directive) = step_mission(&mission, &status, &cfg.mission);
        let command = match directive {
            Directive::Track => track_cmd,
            Directive::Hover | Directive::Idle => VelocityCommand::ZERO,
            Directive::GoTo { target, max_speed } => goto_velocity(state.drone_pos, target, max_speed, dt, state.drone_yaw),
        };

        let frame_sent = matches!(directive, Directive::Track | Directive::Hover);
        if frame_sent {
            if let Some(s) = sink.as_deref_mut() {
                let time_ms = (state.t * 1000.0).round() as u32;
                let msg = build_velocity_message(&command, &s.ids(), time_ms)?;
                s.send(&msg)?;
            }
        }

        trace.rows.push(TraceRow {
            tick,
            t: state.t,
            drone: state.drone_pos,
            target: state.target_pos,
            battery_v: status.battery_voltage,
            detected: target.is_some(),
            detections,
            face: chosen.map(|g| g.face.bbox),
            body: chosen.map(|g| g.body.bbox),
            centroid: target.map(|t| t.centroid.center()),
            bbox_w_px: target.map(|t| t.range.w),
            zone: target.map(|t| classify_zone(t.centroid.center(), cam.img_w, cam.img_h, &cfg.tracker)),
            command,
            phase: next_mission.phase,
            frame_sent,
        });
        mission = next_mission;
        if mission.phase == MissionPhase::Ended {
            break;
        }
        state = step_sim(&state, &command, dt);
    }
    if let Some(s) = sink {
        s.flush()?;
    }
    Ok(trace)
}

/// Body-frame velocity reaching `target` this tick if `max_speed` allows,
/// otherwise heading straight for it at `max_speed`.
fn goto_velocity(pos: Ned, target: Ned, max_speed: f64, dt: f64, yaw: f64) -> VelocityCommand {
    let delta = target - pos;
    let dist = delta.norm();
    if dist == 0.0 {
        return VelocityCommand::ZERO;
    }
    let speed = (dist / dt).min(max_speed);
    let v = delta * (speed / dist);
    let (f, r, d) = ned_to_body(v, yaw);
    VelocityCommand::new(f, r, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendered_needs_cascades() {
        let cfg = SimConfig {
            mode: DetectionMode::Rendered,
            ..SimConfig::default()
        };
        assert!(matches!(run_closed_loop(&cfg, None, None), Err(SimError::Config(_))));
    }

    #[test]
    fn goto_clamps_speed() {
        let v = goto_velocity(Ned::default(), Ned::new(0.0, 0.0, -5.0), 1.0, 0.25, 0.0);
        assert_eq!(v, VelocityCommand::new(0.0, 0.0, -1.0));
        let v = goto_velocity(Ned::default(), Ned::new(0.0, 0.0, -0.1), 1.0, 0.25, 0.0);
        assert!((v.vz + 0.4).abs() < 1e-12);
    }

    #[test]
    fn default_run_converges() {
        let cfg = SimConfig::default();
        let trace = run_closed_loop(&cfg, None, None).unwrap();
        assert_eq!(trace.rows.len(), cfg.ticks);
        assert!(trace.converged(10, &cfg.tracker, cfg.camera.img_w));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let cfg = SimConfig {
            ticks: 3,
            ..SimConfig::default()
        };
        let csv = run_closed_loop(&cfg, None, None).unwrap().to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("tick,t,drone_n"));
    }
}
