//! Helpers shared by the integration tests: corpus checks, random program
//! generation, the simulation oracles and golden files.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use kiloscript::automaton::{lower_with, LowerOptions, RepeatEncoding};
use kiloscript::model::{Action, ActionProgram, ColorState, Event, MessagePayload, MotorCommand, Screenplay, Step};
use kiloscript::parser::parse_with_diagnostics;
use kiloscript::sim::{SceneConfig, Trace, TraceKind};
use kiloscript::TreeWalker;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn scenes_dir() -> PathBuf {
    manifest_dir().join("../../scenes")
}

pub fn load_scene(name: &str) -> SceneConfig {
    SceneConfig::load(&scenes_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Compares against a checked-in file; `KILOSCRIPT_BLESS=1` rewrites it.
pub fn golden(path: &Path, actual: &str) -> Result<(), String> {
    if std::env::var_os("KILOSCRIPT_BLESS").is_some() {
        fs::write(path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want == actual {
        Ok(())
    } else {
        let line = want.lines().zip(actual.lines()).position(|(a, b)| a != b).map_or(0, |i| i + 1);
        Err(format!("{} differs from the output (first difference near line {line})", path.display()))
    }
}

// ---------------------------------------------------------------- corpus

/// Every `tests/corpus/*.ks` starts with `# expect: ok` or a comma-separated
/// list of `CODE@line:col` covering all diagnostics. Returns the file count.
pub fn check_corpus() -> Result<usize, String> {
    let mut paths: Vec<PathBuf> = fs::read_dir(manifest_dir().join("tests/corpus"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ks"))
        .collect();
    paths.sort();
    for p in &paths {
        let src = fs::read_to_string(p).map_err(|e| e.to_string())?;
        let name = p.file_name().unwrap().to_string_lossy();
        let header = src.lines().next().and_then(|l| l.strip_prefix("# expect: ")).ok_or(format!("{name}: no expect line"))?;
        let want: Vec<String> = if header == "ok" { vec![] } else { header.split(", ").map(String::from).collect() };
        let (sp, diags) = parse_with_diagnostics(&src);
        let got: Vec<String> = diags.iter().map(|d| format!("{}@{}:{}", d.code, d.line, d.column)).collect();
        if got != want {
            return Err(format!("{name}: expected {want:?}, got {got:?}"));
        }
        let should_parse = !want.iter().any(|w| w.starts_with('E'));
        if sp.is_some() != should_parse {
            return Err(format!("{name}: accepted = {}, expected {should_parse}", sp.is_some()));
        }
    }
    Ok(paths.len())
}

// ------------------------------------------------------- random programs

pub const EVENTS: [Event; 5] = [
    Event::MessageHeard { filter: None },
    Event::MessageHeard { filter: Some(1) },
    Event::MessageHeard { filter: Some(2) },
    Event::Silence { window_ms: 20 },
    Event::Silence { window_ms: 45 },
];

const MOTORS: [MotorCommand; 4] = [MotorCommand::Stop, MotorCommand::Straight, MotorCommand::TurnLeft, MotorCommand::TurnRight];

fn random_action(rng: &mut ChaCha8Rng, max_ms: u32) -> Action {
    let led = ColorState::new(rng.random_range(0..=3), rng.random_range(0..=3), rng.random_range(0..=3)).unwrap();
    let tx = rng.random_bool(0.4).then(|| {
        let n = rng.random_range(1..=3);
        let mut bytes: Vec<u8> = (0..n).map(|_| rng.random()).collect();
        bytes[0] = rng.random_range(1..=3);
        MessagePayload::new(bytes).unwrap()
    });
    Action::new(MOTORS[rng.random_range(0..4)], led, tx, rng.random_range(1..=max_ms)).unwrap()
}

fn random_steps(rng: &mut ChaCha8Rng, depth_left: usize, max_ms: u32) -> Vec<Step> {
    let n = rng.random_range(1..=4);
    (0..n)
        .map(|_| {
            if depth_left > 0 && rng.random_bool(0.4) {
                let body = random_steps(rng, depth_left - 1, max_ms);
                if rng.random_bool(0.5) {
                    Step::Repeat { count: rng.random_range(1..=4), body }
                } else {
                    Step::Until { event: EVENTS[rng.random_range(0..EVENTS.len())], body }
                }
            } else {
                Step::Act(random_action(rng, max_ms))
            }
        })
        .collect()
}

/// A program of at most `max_depth` nesting levels and `max_actions` actions.
pub fn random_program(rng: &mut ChaCha8Rng, role: &str, max_depth: usize, max_actions: usize, max_ms: u32) -> ActionProgram {
    loop {
        let p = ActionProgram::new(role, random_steps(rng, max_depth, max_ms));
        if p.action_count() <= max_actions {
            return p;
        }
    }
}

pub fn random_screenplay(rng: &mut ChaCha8Rng) -> Screenplay {
    let mut sp = Screenplay::default();
    for i in 0..rng.random_range(1..=3) {
        sp.insert(random_program(rng, &format!("r{i}"), 4, 40, 5000));
    }
    sp
}

// ------------------------------------------------- lowering equivalence

/// Runs the tree walker and every applicable lowering side by side at 1 ms
/// resolution for `horizon_ms`, with events fired at random, and reports
/// the first divergence in outputs or entries.
pub fn timelines_agree(program: &ActionProgram, seed: u64, horizon_ms: u32) -> Result<(), String> {
    let mut automata = Vec::new();
    for encoding in [RepeatEncoding::Auto, RepeatEncoding::Unroll, RepeatEncoding::Counters] {
        let opts = LowerOptions { encoding, ..LowerOptions::default() };
        match lower_with(program, &opts) {
            Ok(a) => automata.push((encoding, a)),
            Err(_) if encoding == RepeatEncoding::Unroll => {}
            Err(e) => return Err(format!("{encoding:?}: {e}")),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walker = TreeWalker::new(program);
    let mut cursors: Vec<_> = automata.iter().map(|(_, a)| a.start()).collect();
    for t in 0..=horizon_ms {
        let fired: Vec<Event> = EVENTS.iter().copied().filter(|_| rng.random_bool(0.02)).collect();
        let dt = if t == 0 { 0 } else { 1 };
        let want_entry = if t == 0 { None } else { walker.step(program, dt, &fired) };
        let want = walker.action(program);
        for ((enc, a), c) in automata.iter().zip(&mut cursors) {
            let entry = if t == 0 { None } else { a.step(c, dt, &fired) };
            let got = a.action(c);
            if entry != want_entry || !got.same_outputs(&want) || a.state(c.state).act != walker.act_index(program) {
                return Err(format!("{enc:?} diverges at t={t}: {entry:?} {got:?} vs {want_entry:?} {want:?}"));
            }
        }
    }
    Ok(())
}

// ----------------------------------------------------------- sync oracle

/// Firing times of fully connected pulse-coupled oscillators, computed tick
/// by tick without the simulator: a fire at tick k is heard at tick k + 1.
pub fn sync_oracle(phases: &[f64], period_ms: u32, epsilon: f64, tick_ms: u32, duration_ms: u32) -> Vec<Vec<u64>> {
    let mut ph = phases.to_vec();
    let mut fired_prev = vec![false; ph.len()];
    let mut fires = vec![Vec::new(); ph.len()];
    let mut t = u64::from(tick_ms);
    while t < u64::from(duration_ms) {
        let mut fired_now = vec![false; ph.len()];
        for i in 0..ph.len() {
            let heard = (0..ph.len()).any(|j| j != i && fired_prev[j]);
            let mut p = ph[i] + f64::from(tick_ms) / f64::from(period_ms);
            if heard {
                p = ((1.0 + epsilon) * p).min(1.0);
            }
            if p >= 1.0 {
                p = 0.0;
                fired_now[i] = true;
                fires[i].push(t);
            }
            ph[i] = p;
        }
        fired_prev = fired_now;
        t += u64::from(tick_ms);
    }
    fires
}

/// Groups fire times of all robots into rounds separated by gaps above
/// `gap_ms`; returns `(round start, spread)` for rounds where every robot
/// fired exactly once.
pub fn firing_rounds(fires: &[Vec<u64>], gap_ms: u64) -> Vec<(u64, u64)> {
    let mut all: Vec<(u64, usize)> = fires.iter().enumerate().flat_map(|(i, f)| f.iter().map(move |t| (*t, i))).collect();
    all.sort();
    let mut rounds = Vec::new();
    let mut cur: Vec<(u64, usize)> = Vec::new();
    let mut flush = |cur: &mut Vec<(u64, usize)>| {
        let mut who: Vec<usize> = cur.iter().map(|c| c.1).collect();
        who.sort();
        who.dedup();
        if !cur.is_empty() && who.len() == fires.len() && cur.len() == fires.len() {
            rounds.push((cur[0].0, cur.last().unwrap().0 - cur[0].0));
        }
        cur.clear();
    };
    for f in all {
        if cur.last().is_some_and(|l| f.0 - l.0 > gap_ms) {
            flush(&mut cur);
        }
        cur.push(f);
    }
    flush(&mut cur);
    rounds
}

/// Times at which each robot's LED switched to a lit color.
pub fn flash_times(trace: &Trace, ids: &[u32]) -> Vec<Vec<u64>> {
    ids.iter()
        .map(|id| trace.of(*id, TraceKind::LedSet).filter(|e| e.payload != "0 0 0").map(|e| e.t_ms).collect())
        .collect()
}

// ---------------------------------------------------------- orbit oracle

pub struct OrbitRun {
    /// First time the orbiter has swept a full turn around the anchor.
    pub revolution_ms: Option<u64>,
    /// `(t, distance)` after each tick.
    pub distances: Vec<(u64, f64)>,
}

/// Noise-free orbiter around an anchor at the origin with exact, fresh
/// range readings each tick. Kinematics written out directly: straight
/// ticks move `v dt`, turns move the center along an arc of radius `pivot`.
#[allow(clippy::too_many_arguments)]
pub fn orbit_oracle(start: (f64, f64, f64), desired: f64, band: f64, v: f64, omega: f64, pivot: f64, tick_ms: u32, duration_ms: u32) -> OrbitRun {
    let (mut x, mut y, mut h) = start;
    let dt = f64::from(tick_ms) / 1000.0;
    let mut swept = 0.0;
    let mut angle = y.atan2(x);
    let mut run = OrbitRun { revolution_ms: None, distances: Vec::new() };
    let mut reading: Option<f64> = None;
    let mut t = 0u64;
    while t < u64::from(duration_ms) {
        // the first reading arrives one tick after the anchor starts sending
        let turn = match reading {
            None => 0,
            Some(d) if d < desired - band / 2.0 => 1,
            Some(d) if d > desired + band / 2.0 => -1,
            Some(_) => 2,
        };
        match turn {
            0 => {}
            2 => {
                x += v * dt * h.cos();
                y += v * dt * h.sin();
            }
            s => {
                let s = f64::from(s);
                let dh = s * omega * dt;
                // chord of the arc about the pivot on the turning side
                let chord = 2.0 * pivot * (dh / 2.0).sin().abs();
                let dir = h + dh / 2.0;
                x += chord * dir.cos();
                y += chord * dir.sin();
                h += dh;
            }
        }
        t += u64::from(tick_ms);
        reading = Some(x.hypot(y));
        let a = y.atan2(x);
        let mut da = a - angle;
        while da > PI {
            da -= 2.0 * PI;
        }
        while da < -PI {
            da += 2.0 * PI;
        }
        swept += da;
        angle = a;
        if run.revolution_ms.is_none() && swept.abs() >= 2.0 * PI {
            run.revolution_ms = Some(t);
        }
        run.distances.push((t, x.hypot(y)));
    }
    run
}

// ----------------------------------------------------- march measurement

/// `(on, off)` motor intervals per robot from BUZZ events.
pub fn buzz_intervals(trace: &Trace, ids: &[u32]) -> BTreeMap<u32, Vec<(u64, u64)>> {
    ids.iter()
        .map(|id| {
            let mut on = None;
            let mut out = Vec::new();
            for e in trace.events.iter().filter(|e| e.robot_id == *id) {
                match e.kind {
                    TraceKind::BuzzOn => on = Some(e.t_ms),
                    TraceKind::BuzzOff => out.extend(on.take().map(|s| (s, e.t_ms))),
                    _ => {}
                }
            }
            (*id, out)
        })
        .collect()
}

pub fn overlap(a: (u64, u64), b: (u64, u64)) -> u64 {
    a.1.min(b.1).saturating_sub(a.0.max(b.0))
}
