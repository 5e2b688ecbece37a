use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::physics::{advance, Pose};
use super::scene::{Behavior, SceneConfig, SceneError};
use super::trace::{Trace, TraceEvent, TraceKind};
use crate::automaton::{lower, Automaton, Cursor};
use crate::behaviors::{march_step, orbit_step, sync_step, ControllerSpec, FIRE_BYTE};
use crate::exec::{Cause, Entry};
use crate::interp::TreeWalker;
use crate::model::{ActionProgram, ColorState, Event, MessagePayload, MotorCommand};

/// How robots playing a role execute their program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Lowered timed automata, as the generated C runs them.
    #[default]
    Automaton,
    /// The tree-walking interpreter over the parsed program.
    Interpreter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reception {
    pub from: u32,
    pub payload: MessagePayload,
    pub distance_mm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Executor {
    Automaton { role: String, cursor: Cursor },
    Tree { role: String, walker: TreeWalker },
    Controller { spec: ControllerSpec, phase: f64, estimate_mm: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub id: u32,
    pub pose: Pose,
    pub exec: Executor,
    pub led: ColorState,
    pub motor: MotorCommand,
    pub tx: Option<MessagePayload>,
    /// Time of the next broadcast while `tx` is set.
    pub next_tx_ms: Option<u64>,
    pub last_rx_ms: Option<u64>,
    /// Receptions of the current tick.
    pub rx_queue: Vec<Reception>,
}

#[derive(Debug, Clone)]
pub struct World {
    cfg: SceneConfig,
    t_ms: u64,
    robots: Vec<RobotState>,
    programs: BTreeMap<String, ActionProgram>,
    automata: BTreeMap<String, Automaton>,
    rng: ChaCha8Rng,
    trace: Trace,
    overlapping: BTreeSet<(u32, u32)>,
}

struct Outputs {
    motor: MotorCommand,
    led: ColorState,
    tx: Option<MessagePayload>,
}

pub fn spawn_world(cfg: &SceneConfig) -> Result<World, SceneError> {
    spawn_world_with(cfg, ExecMode::Automaton)
}

pub fn spawn_world_with(cfg: &SceneConfig, mode: ExecMode) -> Result<World, SceneError> {
    cfg.validate()?;
    let programs = cfg.screenplay.as_ref().map(|sp| sp.programs.clone()).unwrap_or_default();
    let mut automata = BTreeMap::new();
    if mode == ExecMode::Automaton {
        for (role, p) in &programs {
            let a = lower(p).map_err(|source| SceneError::Lower { role: role.clone(), source })?;
            automata.insert(role.clone(), a);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut specs: Vec<_> = cfg.robots.iter().collect();
    specs.sort_by_key(|r| r.id);
    let robots = specs
        .into_iter()
        .map(|r| {
            let exec = match (&r.behavior, mode) {
                (Behavior::Role(role), ExecMode::Automaton) => {
                    Executor::Automaton { role: role.clone(), cursor: automata[role].start() }
                }
                (Behavior::Role(role), ExecMode::Interpreter) => {
                    Executor::Tree { role: role.clone(), walker: TreeWalker::new(&programs[role]) }
                }
                (Behavior::Controller(spec), _) => {
                    let phase = match spec {
                        ControllerSpec::Sync { .. } | ControllerSpec::March { .. } => rng.random::<f64>(),
                        _ => 0.0,
                    };
                    Executor::Controller { spec: spec.clone(), phase, estimate_mm: None }
                }
            };
            RobotState {
                id: r.id,
                pose: Pose { x: r.x, y: r.y, heading: r.heading_rad },
                exec,
                led: ColorState::OFF,
                motor: MotorCommand::Stop,
                tx: None,
                next_tx_ms: None,
                last_rx_ms: if cfg.physics.silence_from_start { Some(0) } else { None },
                rx_queue: Vec::new(),
            }
        })
        .collect();
    Ok(World {
        cfg: cfg.clone(),
        t_ms: 0,
        robots,
        programs,
        automata,
        rng,
        trace: Trace::default(),
        overlapping: BTreeSet::new(),
    })
}

/// Processes the tick at the current time and advances the clock by one tick.
pub fn step_world(world: &mut World) {
    world.step();
}

pub fn run(cfg: &SceneConfig) -> Result<Trace, SceneError> {
    run_with(cfg, ExecMode::Automaton)
}

pub fn run_with(cfg: &SceneConfig, mode: ExecMode) -> Result<Trace, SceneError> {
    let mut w = spawn_world_with(cfg, mode)?;
    while !w.is_done() {
        w.step();
    }
    Ok(w.into_trace())
}

/// Fixed-point text without a negative zero.
fn fixed(v: f64, digits: usize) -> String {
    let s = format!("{v:.digits$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn entry_events(t_ms: u64, id: u32, entry: Option<Entry>, buf: &mut Vec<TraceEvent>) {
    let Some(entry) = entry else { return };
    if let Cause::Event(e) = entry.cause {
        buf.push(TraceEvent { t_ms, robot_id: id, kind: TraceKind::EventFired, payload: e.to_string() });
    }
    buf.push(state_enter(t_ms, id, entry.act));
}

fn state_enter(t_ms: u64, id: u32, act: Option<usize>) -> TraceEvent {
    let payload = act.map_or("act=end".to_string(), |a| format!("act={a}"));
    TraceEvent { t_ms, robot_id: id, kind: TraceKind::StateEnter, payload }
}

impl World {
    pub fn t_ms(&self) -> u64 {
        self.t_ms
    }

    pub fn config(&self) -> &SceneConfig {
        &self.cfg
    }

    /// Robots in id order.
    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn robot(&self, id: u32) -> Option<&RobotState> {
        self.robots.iter().find(|r| r.id == id)
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    pub fn is_done(&self) -> bool {
        self.t_ms >= u64::from(self.cfg.duration_ms)
    }

    pub fn step(&mut self) {
        let t = self.t_ms;
        let tick = self.cfg.tick_ms;
        let mut buf = Vec::new();
        self.note_overlaps(t);
        if t == 0 {
            for i in 0..self.robots.len() {
                let out = self.initial_outputs(i, &mut buf);
                self.apply(i, out, t, &mut buf);
            }
        } else {
            self.deliver(t, &mut buf);
            for i in 0..self.robots.len() {
                let out = self.execute(i, t, tick, &mut buf);
                self.apply(i, out, t, &mut buf);
            }
        }
        self.move_robots(tick);
        buf.sort_by_key(|e| (e.robot_id, e.kind));
        self.trace.events.append(&mut buf);
        self.t_ms += u64::from(tick);
    }

    fn note_overlaps(&mut self, t: u64) {
        let limit = self.cfg.physics.body_diameter;
        for (i, a) in self.robots.iter().enumerate() {
            for b in &self.robots[i + 1..] {
                let d = a.pose.distance_to(&b.pose);
                let pair = (a.id, b.id);
                if d < limit {
                    if self.overlapping.insert(pair) {
                        self.trace.notes.push(format!(
                            "warning: t={t} robots {} and {} overlap ({} mm apart)",
                            a.id,
                            b.id,
                            fixed(d, 1)
                        ));
                    }
                } else {
                    self.overlapping.remove(&pair);
                }
            }
        }
    }

    fn deliver(&mut self, t: u64, buf: &mut Vec<TraceEvent>) {
        for r in &mut self.robots {
            r.rx_queue.clear();
        }
        let period = u64::from(self.cfg.physics.tx_period_ms);
        let loss = self.cfg.physics.msg_loss_prob;
        let noise = (self.cfg.physics.distance_noise_std > 0.0)
            .then(|| Normal::new(0.0, self.cfg.physics.distance_noise_std).expect("checked std"));
        for s in 0..self.robots.len() {
            let sender = &self.robots[s];
            let (Some(payload), Some(due)) = (sender.tx.clone(), sender.next_tx_ms) else { continue };
            if due > t {
                continue;
            }
            let (from, at) = (sender.id, sender.pose);
            let mut next = due;
            while next <= t {
                next += period;
            }
            self.robots[s].next_tx_ms = Some(next);
            buf.push(TraceEvent { t_ms: t, robot_id: from, kind: TraceKind::Tx, payload: payload.to_string() });
            for j in 0..self.robots.len() {
                if j == s {
                    continue;
                }
                let d = at.distance_to(&self.robots[j].pose);
                if d > self.cfg.physics.comm_radius {
                    continue;
                }
                if loss > 0.0 && self.rng.random::<f64>() < loss {
                    continue;
                }
                let est = match &noise {
                    Some(n) => (d + n.sample(&mut self.rng)).max(0.0),
                    None => d,
                };
                let r = &mut self.robots[j];
                buf.push(TraceEvent {
                    t_ms: t,
                    robot_id: r.id,
                    kind: TraceKind::Rx,
                    payload: format!("from={from} dist={} data={payload}", fixed(est, 3)),
                });
                r.last_rx_ms = Some(t);
                r.rx_queue.push(Reception { from, payload: payload.clone(), distance_mm: est });
            }
        }
    }

    fn fired_events(&self, r: &RobotState, events: Vec<Event>, t: u64) -> BTreeSet<Event> {
        events
            .into_iter()
            .filter(|e| match *e {
                Event::MessageHeard { filter } => {
                    r.rx_queue.iter().any(|m| filter.is_none_or(|b| m.payload.first() == Some(b)))
                }
                Event::Silence { window_ms } => r.last_rx_ms.is_some_and(|l| t - l >= u64::from(window_ms)),
            })
            .collect()
    }

    fn initial_outputs(&mut self, i: usize, buf: &mut Vec<TraceEvent>) -> Outputs {
        let r = &self.robots[i];
        match &r.exec {
            Executor::Automaton { role, cursor } => {
                let a = &self.automata[role];
                buf.push(state_enter(0, r.id, a.state(cursor.state).act));
                let act = a.action(cursor);
                Outputs { motor: act.motor, led: act.led, tx: act.tx.clone() }
            }
            Executor::Tree { role, walker } => {
                let p = &self.programs[role];
                buf.push(state_enter(0, r.id, walker.act_index(p)));
                let act = walker.action(p);
                Outputs { motor: act.motor, led: act.led, tx: act.tx }
            }
            Executor::Controller { spec, phase, .. } => {
                let motor = match spec {
                    ControllerSpec::March { duty, .. } => march_step(*phase, *duty),
                    _ => MotorCommand::Stop,
                };
                let led = match spec {
                    ControllerSpec::TextPixel { color } => *color,
                    _ => ColorState::OFF,
                };
                Outputs { motor, led, tx: None }
            }
        }
    }

    fn execute(&mut self, i: usize, t: u64, tick: u32, buf: &mut Vec<TraceEvent>) -> Outputs {
        let id = self.robots[i].id;
        let observed = match &self.robots[i].exec {
            Executor::Automaton { role, .. } => self.fired_events(&self.robots[i], self.automata[role].events(), t),
            Executor::Tree { role, .. } => self.fired_events(&self.robots[i], self.programs[role].events(), t),
            Executor::Controller { .. } => BTreeSet::new(),
        };
        let r = &mut self.robots[i];
        match &mut r.exec {
            Executor::Automaton { role, cursor } => {
                let a = &self.automata[role.as_str()];
                entry_events(t, id, a.step(cursor, tick, &observed), buf);
                let act = a.action(cursor);
                Outputs { motor: act.motor, led: act.led, tx: act.tx.clone() }
            }
            Executor::Tree { role, walker } => {
                let p = &self.programs[role.as_str()];
                entry_events(t, id, walker.step(p, tick, &observed), buf);
                let act = walker.action(p);
                Outputs { motor: act.motor, led: act.led, tx: act.tx }
            }
            Executor::Controller { spec, phase, estimate_mm } => {
                let heard_fire = r.rx_queue.iter().any(|m| m.payload.first() == Some(FIRE_BYTE));
                let fire_msg = || Some(MessagePayload::new(vec![FIRE_BYTE]).expect("one byte"));
                match *spec {
                    ControllerSpec::Sync { period_ms, epsilon, flash_color } => {
                        let (p, fired) = sync_step(*phase, tick, period_ms, epsilon, heard_fire);
                        *phase = p;
                        if fired {
                            Outputs { motor: MotorCommand::Stop, led: flash_color, tx: fire_msg() }
                        } else {
                            Outputs { motor: MotorCommand::Stop, led: ColorState::OFF, tx: None }
                        }
                    }
                    ControllerSpec::March { period_ms, epsilon, duty } => {
                        let (p, fired) = sync_step(*phase, tick, period_ms, epsilon, heard_fire);
                        *phase = p;
                        Outputs { motor: march_step(p, duty), led: ColorState::OFF, tx: fired.then(fire_msg).flatten() }
                    }
                    ControllerSpec::Orbit { anchor_id, desired_mm, band_mm } => {
                        if let Some(m) = r.rx_queue.iter().rev().find(|m| m.from == anchor_id) {
                            *estimate_mm = Some(m.distance_mm);
                        }
                        let motor = estimate_mm.map_or(MotorCommand::Stop, |d| orbit_step(&r.pose, d, desired_mm, band_mm));
                        Outputs { motor, led: ColorState::OFF, tx: None }
                    }
                    ControllerSpec::TextPixel { color } => Outputs { motor: MotorCommand::Stop, led: color, tx: None },
                }
            }
        }
    }

    fn apply(&mut self, i: usize, out: Outputs, t: u64, buf: &mut Vec<TraceEvent>) {
        let r = &mut self.robots[i];
        let ev = |kind, payload| TraceEvent { t_ms: t, robot_id: r.id, kind, payload };
        if out.motor != r.motor {
            let p = r.pose;
            buf.push(ev(
                TraceKind::MotorSet,
                format!("{} x={} y={} h={}", out.motor.keyword(), fixed(p.x, 3), fixed(p.y, 3), fixed(p.heading, 6)),
            ));
            match (r.motor.is_moving(), out.motor.is_moving()) {
                (false, true) => buf.push(ev(TraceKind::BuzzOn, out.motor.keyword().to_string())),
                (true, false) => buf.push(ev(TraceKind::BuzzOff, String::new())),
                _ => {}
            }
            r.motor = out.motor;
        }
        if out.led != r.led {
            buf.push(ev(TraceKind::LedSet, out.led.to_string()));
            r.led = out.led;
        }
        if out.tx != r.tx {
            r.next_tx_ms = out.tx.as_ref().map(|_| t);
            r.tx = out.tx;
        }
    }

    fn move_robots(&mut self, tick: u32) {
        let params = &self.cfg.physics;
        let noise = (params.motion_noise_std > 0.0).then(|| Normal::new(0.0, params.motion_noise_std).expect("checked std"));
        for r in &mut self.robots {
            let stretch = match (&noise, r.motor) {
                (Some(n), MotorCommand::Straight) => 1.0 + n.sample(&mut self.rng),
                _ => 1.0,
            };
            r.pose = self.cfg.arena.clamp(advance(r.pose, r.motor, f64::from(tick), params, stretch));
        }
    }
}
