use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use log::{debug, info};

use uavtrack_core::cascade::{import_legacy_xml, parse_cascade, to_json, Cascade};
use uavtrack_core::dataset::{parse_negative_manifest, parse_positive_manifest, validate_dataset};
use uavtrack_core::gated::{annotate, detect_bodies, gate_faces, GateParams};
use uavtrack_core::imaging::{encode_ppm, load_gray, IntegralPair};
use uavtrack_core::mavlink::{build_velocity_message, encode_frame, to_hex, CommandSink, LinkIds, SinkTarget};
use uavtrack_core::sim::{
    project_target, render_scene, run_closed_loop_observed, scene_gate_params, CascadePair, DetectionMode,
    SimConfig,
};
use uavtrack_core::{Detection, VelocityCommand};

#[derive(Parser)]
#[command(name = "uavtrack", version, about = "Gated person detection and visual tracking for small UAVs")]
struct Cli {
    /// JSON configuration: gate parameters for `detect`, the simulation for `track-sim`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect upper bodies, and faces inside them, in one image.
    Detect(DetectArgs),
    /// Run the closed-loop tracking simulation.
    TrackSim(TrackSimArgs),
    /// Print a velocity command as a hex MAVLink frame.
    EncodeCmd(EncodeArgs),
    /// Convert an OpenCV XML cascade to JSON.
    ImportCascade(ImportArgs),
    /// Check training manifests against the image tree.
    ValidateDataset(DatasetArgs),
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    body_cascade: PathBuf,
    #[arg(long)]
    face_cascade: Option<PathBuf>,
    #[arg(long)]
    image: PathBuf,
    /// Annotated PPM output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct TrackSimArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Write an annotated PPM per tick here.
    #[arg(long)]
    frames_dir: Option<PathBuf>,
    /// MAVLink destination: a file path or udp://host:port.
    #[arg(long)]
    mavlink: Option<String>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long, allow_hyphen_values = true)]
    vx: f64,
    #[arg(long, allow_hyphen_values = true)]
    vy: f64,
    #[arg(long, allow_hyphen_values = true)]
    vz: f64,
    #[arg(long, default_value_t = 1)]
    sysid: u8,
    #[arg(long, default_value_t = 191)]
    compid: u8,
    #[arg(long, default_value_t = 1)]
    target_system: u8,
    #[arg(long, default_value_t = 1)]
    target_component: u8,
    #[arg(long, default_value_t = 0)]
    seq: u8,
    #[arg(long, default_value_t = 0)]
    time_ms: u32,
}

#[derive(Args)]
struct ImportArgs {
    #[arg(long)]
    xml: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(disable_help_flag = true)]
struct DatasetArgs {
    #[arg(long)]
    pos: PathBuf,
    #[arg(long)]
    neg: PathBuf,
    #[arg(long)]
    root: PathBuf,
    /// Training window width.
    #[arg(short = 'w', long = "width")]
    width: u32,
    /// Training window height.
    #[arg(short = 'h', long = "height")]
    height: u32,
    #[arg(long, action = ArgAction::Help)]
    help: Option<bool>,
}

fn load_cascade(path: &Path) -> Result<Cascade> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_xml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml")) || text.trim_start().starts_with('<');
    let c = if is_xml { import_legacy_xml(&text) } else { parse_cascade(&text) };
    c.with_context(|| format!("loading cascade {}", path.display()))
}

fn read_json_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_detect(args: &DetectArgs, config: Option<&Path>) -> Result<ExitCode> {
    let params: GateParams = match config {
        Some(p) => read_json_config(p)?,
        None => GateParams::default(),
    };
    params.validate().context("gate parameters")?;
    let body = load_cascade(&args.body_cascade)?;
    let face = args.face_cascade.as_deref().map(load_cascade).transpose()?;
    let img = load_gray(&args.image)?;

    let ip = IntegralPair::new(&img);
    let bodies = detect_bodies(&body, &ip, &params)?;
    let gated = match &face {
        Some(f) => Some(gate_faces(f, &ip, &bodies, &params)?),
        None => None,
    };
    info!("{} body detections", bodies.len());

    let rows: Vec<(Detection, Option<Detection>)> = match &gated {
        Some(g) => g.iter().map(|g| (g.body, Some(g.face))).collect(),
        None => bodies.iter().map(|b| (*b, None)).collect(),
    };
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["index", "body_x", "body_y", "body_w", "body_h", "face_x", "face_y", "face_w", "face_h"])?;
        for (i, (b, f)) in rows.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend([b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h].map(|v| v.to_string()));
            match f {
                Some(f) => rec.extend([f.bbox.x, f.bbox.y, f.bbox.w, f.bbox.h].map(|v| v.to_string())),
                None => rec.extend(std::iter::repeat(String::new()).take(4)),
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    if let Some(path) = &args.out {
        let faces: Vec<Detection> = rows.iter().filter_map(|r| r.1).collect();
        let annotated = annotate(&img, &bodies, &faces);
        fs::write(path, encode_ppm(&annotated)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if rows.is_empty() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_track_sim(args: &TrackSimArgs, config: Option<&Path>) -> Result<ExitCode> {
    let mut cfg = match config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            SimConfig::from_json(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SimConfig {
            gate: scene_gate_params(),
            ..SimConfig::default()
        },
    };
    cfg.validate()?;
    let base = config.and_then(Path::parent).unwrap_or(Path::new("."));
    let cascades = match cfg.cascades.take() {
        Some(files) => Some(CascadePair {
            body: load_cascade(&base.join(&files.body))?,
            face: load_cascade(&base.join(&files.face))?,
        }),
        None if cfg.mode == DetectionMode::Rendered => bail!("rendered mode needs `cascades` in the config"),
        None => None,
    };
    if let Some(dir) = &args.frames_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut sink = match &args.mavlink {
        Some(dest) => Some(CommandSink::open(&SinkTarget::parse(dest), LinkIds::COMPANION)?),
        None => None,
    };

    let mut frame_err = None;
    let trace = run_closed_loop_observed(&cfg, cascades.as_ref(), sink.as_mut(), &mut |view| {
        let Some(dir) = &args.frames_dir else { return };
        if frame_err.is_some() {
            return;
        }
        let rendered;
        let frame = match view.frame {
            Some(f) => f,
            None => {
                rendered = render_scene(project_target(view.state, &cfg.camera).as_ref(), &cfg.camera);
                &rendered
            }
        };
        let bodies: Vec<Detection> = view.detections.iter().map(|g| g.body).collect();
        let faces: Vec<Detection> = view.detections.iter().map(|g| g.face).collect();
        let path = dir.join(format!("frame_{:05}.ppm", view.tick));
        if let Err(e) = fs::write(&path, encode_ppm(&annotate(frame, &bodies, &faces))) {
            frame_err = Some(anyhow::Error::new(e).context(format!("writing {}", path.display())));
        }
    })?;
    if let Some(e) = frame_err {
        return Err(e);
    }
    let file = fs::File::create(&args.trace).with_context(|| format!("writing {}", args.trace.display()))?;
    trace.write_csv(file).with_context(|| format!("writing {}", args.trace.display()))?;
    debug!("{} trace rows", trace.rows.len());

    Ok(if trace.converged(10, &cfg.tracker, cfg.camera.img_w) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn cmd_encode(args: &EncodeArgs) -> Result<ExitCode> {
    let ids = LinkIds {
        sysid: args.sysid,
        compid: args.compid,
        target_system: args.target_system,
        target_component: args.target_component,
    };
    let msg = build_velocity_message(&VelocityCommand::new(args.vx, args.vy, args.vz), &ids, args.time_ms)?;
    println!("{}", to_hex(&encode_frame(&msg, args.seq, ids.sysid, ids.compid)));
    Ok(ExitCode::SUCCESS)
}

fn cmd_import(args: &ImportArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.xml).with_context(|| format!("reading {}", args.xml.display()))?;
    let cascade = import_legacy_xml(&text).with_context(|| format!("importing {}", args.xml.display()))?;
    fs::write(&args.out, to_json(&cascade)).with_context(|| format!("writing {}", args.out.display()))?;
    info!(
        "{} stages, {} features",
        cascade.stages().len(),
        cascade.features().len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: &DatasetArgs) -> Result<ExitCode> {
    let pos_text = fs::read_to_string(&args.pos).with_context(|| format!("reading {}", args.pos.display()))?;
    let neg_text = fs::read_to_string(&args.neg).with_context(|| format!("reading {}", args.neg.display()))?;
    let pos = parse_positive_manifest(&pos_text).with_context(|| format!("parsing {}", args.pos.display()))?;
    let neg = parse_negative_manifest(&neg_text);
    let report = validate_dataset(&pos, &neg, args.width, args.height, &args.root)?;
    print!("{report}");
    Ok(if report.is_clean() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    // Usage errors exit 1 like every other failure; 2 and 3 carry results.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    let config = cli.config.as_deref();
    let result = match &cli.command {
        Command::Detect(a) => cmd_detect(a, config),
        Command::TrackSim(a) => cmd_track_sim(a, config),
        Command::EncodeCmd(a) => cmd_encode(a),
        Command::ImportCascade(a) => cmd_import(a),
        Command::ValidateDataset(a) => cmd_validate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
