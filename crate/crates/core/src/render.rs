//! Offline drawing of a trace as binary PPM (P6) frames.
//!
//! Poses come from the `MOTOR_SET` events: each records the pose and the
//! new motor mode, and the pose in between is extended noise-free from the
//! latest one. LED colors come from `LED_SET`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::{ColorState, MotorCommand};
use crate::sim::{advance, Pose, SceneConfig, TraceEvent, TraceKind};

/// Longer arena side in pixels.
pub const FRAME_LONG_SIDE_PX: f64 = 800.0;
pub const BACKGROUND: [u8; 3] = [224, 224, 224];
pub const UNLIT: [u8; 3] = [64, 64, 64];

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("trace mentions robot {0}, which is not in the scene")]
    UnknownRobot(u32),
    #[error("bad {kind} payload '{payload}' at t={t_ms}")]
    BadPayload { t_ms: u64, kind: TraceKind, payload: String },
    #[error("fps must be positive")]
    BadFps,
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB, top row first.
    pub pixels: Vec<u8>,
}

impl Frame {
    fn blank(width: usize, height: usize) -> Self {
        Frame { width, height, pixels: BACKGROUND.repeat(width * height) }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Maps arena millimetres to pixel coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Viewport {
    pub scale: f64,
    pub width: usize,
    pub height: usize,
    half_w: f64,
    half_h: f64,
}

impl Viewport {
    pub fn for_scene(cfg: &SceneConfig) -> Self {
        let (w, h) = (cfg.arena.width, cfg.arena.height);
        let scale = FRAME_LONG_SIDE_PX / w.max(h);
        Viewport {
            scale,
            width: ((w * scale).round() as usize).max(1),
            height: ((h * scale).round() as usize).max(1),
            half_w: w / 2.0,
            half_h: h / 2.0,
        }
    }

    /// Pixel containing the arena point `(x, y)`, y up.
    pub fn to_pixel(&self, x: f64, y: f64) -> (usize, usize) {
        let px = ((x + self.half_w) * self.scale).floor().clamp(0.0, (self.width - 1) as f64);
        let py = ((self.half_h - y) * self.scale).floor().clamp(0.0, (self.height - 1) as f64);
        (px as usize, py as usize)
    }
}

#[derive(Debug, Clone)]
struct Timeline {
    moves: Vec<(u64, MotorCommand, Pose)>,
    leds: Vec<(u64, ColorState)>,
}

fn parse_motor(e: &TraceEvent) -> Option<(MotorCommand, Pose)> {
    let mut parts = e.payload.split(' ');
    let motor = MotorCommand::from_keyword(parts.next()?)?;
    let mut field = |key: &str| parts.next()?.strip_prefix(key)?.parse::<f64>().ok();
    let (x, y, heading) = (field("x=")?, field("y=")?, field("h=")?);
    Some((motor, Pose { x, y, heading }))
}

fn parse_led(e: &TraceEvent) -> Option<ColorState> {
    let v: Vec<u8> = e.payload.split(' ').map(|s| s.parse().ok()).collect::<Option<_>>()?;
    match v[..] {
        [r, g, b] => ColorState::new(r, g, b).ok(),
        _ => None,
    }
}

fn timelines(cfg: &SceneConfig, events: &[TraceEvent]) -> Result<BTreeMap<u32, Timeline>, RenderError> {
    let mut map: BTreeMap<u32, Timeline> = cfg
        .robots
        .iter()
        .map(|r| {
            let pose = Pose { x: r.x, y: r.y, heading: r.heading_rad };
            (r.id, Timeline { moves: vec![(0, MotorCommand::Stop, pose)], leds: vec![(0, ColorState::OFF)] })
        })
        .collect();
    for e in events {
        let tl = map.get_mut(&e.robot_id).ok_or(RenderError::UnknownRobot(e.robot_id))?;
        let bad = || RenderError::BadPayload { t_ms: e.t_ms, kind: e.kind, payload: e.payload.clone() };
        match e.kind {
            TraceKind::MotorSet => {
                let (m, p) = parse_motor(e).ok_or_else(bad)?;
                tl.moves.push((e.t_ms, m, p));
            }
            TraceKind::LedSet => tl.leds.push((e.t_ms, parse_led(e).ok_or_else(bad)?)),
            _ => {}
        }
    }
    Ok(map)
}

fn last_at<T: Copy>(items: &[(u64, T)], t: u64) -> T {
    let i = items.partition_point(|(at, _)| *at <= t);
    items[i.saturating_sub(1)].1
}

impl Timeline {
    fn pose_at(&self, cfg: &SceneConfig, t: f64) -> Pose {
        let i = self.moves.partition_point(|(at, _, _)| *at as f64 <= t).saturating_sub(1);
        let (at, motor, pose) = self.moves[i];
        cfg.arena.clamp(advance(pose, motor, t - at as f64, &cfg.physics, 1.0))
    }

    fn led_at(&self, t: f64) -> ColorState {
        last_at(&self.leds, t.floor() as u64)
    }
}

/// Frame `i` shows time `i * 1000 / fps` ms; there are
/// `duration_ms * fps / 1000` frames.
pub fn frame_count(duration_ms: u32, fps: u32) -> usize {
    (u64::from(duration_ms) * u64::from(fps) / 1000) as usize
}

/// Reconstructed pose and LED of every robot at `t_ms`.
pub fn snapshot(cfg: &SceneConfig, events: &[TraceEvent], t_ms: f64) -> Result<BTreeMap<u32, (Pose, ColorState)>, RenderError> {
    Ok(timelines(cfg, events)?.into_iter().map(|(id, tl)| (id, (tl.pose_at(cfg, t_ms), tl.led_at(t_ms)))).collect())
}

pub fn render_frames(cfg: &SceneConfig, events: &[TraceEvent], fps: u32) -> Result<Vec<Frame>, RenderError> {
    if fps == 0 {
        return Err(RenderError::BadFps);
    }
    let lines = timelines(cfg, events)?;
    let view = Viewport::for_scene(cfg);
    let radius = cfg.physics.body_diameter / 2.0 * view.scale;
    Ok((0..frame_count(cfg.duration_ms, fps))
        .map(|i| {
            let t = i as f64 * 1000.0 / f64::from(fps);
            let mut f = Frame::blank(view.width, view.height);
            for tl in lines.values() {
                let p = tl.pose_at(cfg, t);
                let led = tl.led_at(t);
                let color = if led.is_off() { UNLIT } else { led.to_rgb8() };
                draw_disc(&mut f, &view, p, radius, color);
            }
            f
        })
        .collect())
}

fn draw_disc(f: &mut Frame, view: &Viewport, p: Pose, radius_px: f64, color: [u8; 3]) {
    let cx = (p.x + view.half_w) * view.scale;
    let cy = (view.half_h - p.y) * view.scale;
    let (x0, x1) = ((cx - radius_px).floor().max(0.0) as usize, ((cx + radius_px).ceil() as usize).min(f.width));
    let (y0, y1) = ((cy - radius_px).floor().max(0.0) as usize, ((cy + radius_px).ceil() as usize).min(f.height));
    for y in y0..y1 {
        for x in x0..x1 {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            if dx * dx + dy * dy <= radius_px * radius_px {
                let i = 3 * (y * f.width + x);
                f.pixels[i..i + 3].copy_from_slice(&color);
            }
        }
    }
}

/// Writes `frame_00000.ppm`, `frame_00001.ppm`, ... into `dir`, creating it.
pub fn write_frames(frames: &[Frame], dir: &Path) -> Result<(), RenderError> {
    let io = |path: &Path, source| RenderError::Io { path: path.display().to_string(), source };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (i, f) in frames.iter().enumerate() {
        let path = dir.join(format!("frame_{i:05}.ppm"));
        fs::write(&path, f.to_ppm()).map_err(|e| io(&path, e))?;
    }
    Ok(())
}
