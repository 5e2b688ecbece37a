//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so
//! the lines show up in `cargo test` output.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use kiloscript::behaviors::{layout_text, Bitmap, ControllerSpec};
use kiloscript::codegen::{emit_c, CodegenOptions};
use kiloscript::render::{render_frames, Viewport};
use kiloscript::sim::{run, spawn_world, step_world, Behavior, Executor, TraceKind};
use kiloscript::{format_screenplay, lower, parse_screenplay};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:.2?}, limit {limit:?}"))
    }
}

fn grammar_corpus() -> Outcome {
    let start = Instant::now();
    let files = check_corpus()?;
    if files < 30 {
        return Err(format!("only {files} corpus files"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200 {
        let sp = random_screenplay(&mut rng);
        let text = format_screenplay(&sp);
        let back = parse_screenplay(&text).map_err(|d| format!("AST {i}: formatted text does not parse: {}", d[0]))?;
        if back != sp {
            return Err(format!("AST {i}: round trip changed the screenplay"));
        }
    }
    let took = within(Duration::from_secs(5), start)?;
    Ok(format!("{files} corpus files as annotated, 200/200 round trips, {took:.2?}"))
}

fn lowering_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut actions = 0;
    for i in 0..500u64 {
        let p = random_program(&mut rng, "p", 4, 100, 40);
        actions += p.action_count();
        timelines_agree(&p, 1000 + i, 2000).map_err(|e| format!("program {i}: {e}"))?;
    }
    let took = within(Duration::from_secs(60), start)?;
    Ok(format!("500 programs ({actions} actions), 2001 ms each at 1 ms resolution, {took:.2?}"))
}

fn blink() -> Outcome {
    let cfg = load_scene("blink.json");
    let trace = run(&cfg).map_err(|e| e.to_string())?;
    let tick = u64::from(cfg.tick_ms);
    // broadcaster: set at t=0, first sent one tick later, then on the first
    // tick at or after each multiple of the period; the step that ends its
    // 5 s action runs after that tick's delivery
    let period = u64::from(cfg.physics.tx_period_ms);
    let end = 5000u64.div_ceil(tick) * tick;
    let last_rx = (end / period * period).div_ceil(tick) * tick;
    let fire_at = (last_rx + 2000).div_ceil(tick) * tick;
    let leds: Vec<(u64, String)> = trace.of(1, TraceKind::LedSet).map(|e| (e.t_ms, e.payload.clone())).collect();
    let during: Vec<&str> = leds.iter().filter(|(t, _)| *t <= end).map(|(_, p)| p.as_str()).collect();
    if during.len() < 10 || during.iter().enumerate().any(|(i, p)| *p != ["3 0 0", "0 0 3"][i % 2]) {
        return Err(format!("LED does not alternate red/blue while transmitting: {during:?}"));
    }
    let fired: Vec<u64> = trace.of(1, TraceKind::EventFired).map(|e| e.t_ms).collect();
    if fired != [fire_at] || !(7000..=7000 + tick).contains(&fire_at) {
        return Err(format!("silence fired at {fired:?}, expected [{fire_at}] within [7000, {}]", 7000 + tick));
    }
    let ev = trace.of(1, TraceKind::EventFired).next().unwrap();
    if ev.payload != "silence 2000ms" || leds.last() != Some(&(fire_at, "0 0 0".to_string())) {
        return Err(format!("expected LED off at {fire_at}, last LED change {:?}", leds.last()));
    }
    golden(&manifest_dir().join("tests/golden/blink.trace"), &trace.to_text())?;
    Ok(format!("last reception {last_rx} ms, silence fired at {fire_at} ms then LED off; golden trace matches"))
}

fn determinism() -> Outcome {
    for name in ["blink.json", "sync.json", "orbit.json", "march.json", "no_war.json", "wander.json"] {
        let cfg = load_scene(name);
        let a = run(&cfg).map_err(|e| e.to_string())?.to_text();
        let b = run(&cfg).map_err(|e| e.to_string())?.to_text();
        if a != b {
            return Err(format!("{name}: two runs differ"));
        }
    }
    let base = load_scene("wander.json");
    let mut traces: Vec<String> = (0..20)
        .map(|seed| {
            let mut cfg = base.clone();
            cfg.seed = seed;
            run(&cfg).unwrap().to_text()
        })
        .collect();
    traces.sort();
    traces.dedup();
    if traces.len() != 20 {
        return Err(format!("20 seeds gave only {} distinct traces", traces.len()));
    }
    Ok("6 scenes byte-identical across runs; 20 seeds with motion noise give 20 distinct traces".into())
}

fn synchronization() -> Outcome {
    let start = Instant::now();
    let cfg = load_scene("sync.json");
    let w = spawn_world(&cfg).map_err(|e| e.to_string())?;
    let (phases, period, epsilon): (Vec<f64>, u32, f64) = {
        let mut ps = Vec::new();
        let (mut per, mut eps) = (0, 0.0);
        for r in w.robots() {
            if let Executor::Controller { spec: ControllerSpec::Sync { period_ms, epsilon, .. }, phase, .. } = &r.exec {
                ps.push(*phase);
                (per, eps) = (*period_ms, *epsilon);
            }
        }
        (ps, per, eps)
    };
    if phases.len() != 10 || epsilon != 0.1 || period != 2000 || cfg.seed != 7 {
        return Err("sync scene is not the 10-robot, ε=0.1, 2000 ms, seed 7 setup".into());
    }
    let ids: Vec<u32> = w.robots().iter().map(|r| r.id).collect();
    let horizon = 50 * period;
    let trace = run(&cfg).map_err(|e| e.to_string())?;
    let sim = flash_times(&trace, &ids);
    let oracle = sync_oracle(&phases, period, epsilon, cfg.tick_ms, cfg.duration_ms);
    let tick = u64::from(cfg.tick_ms);
    for (i, (s, o)) in sim.iter().zip(&oracle).enumerate() {
        if s.len() != o.len() || s.iter().zip(o).any(|(a, b)| a.abs_diff(*b) > tick) {
            return Err(format!("robot {} firing times depart from the oracle by more than one tick", ids[i]));
        }
    }
    let bound = 0.02 * f64::from(period);
    let rounds = firing_rounds(&sim, u64::from(period) / 4);
    let oracle_rounds = firing_rounds(&oracle, u64::from(period) / 4);
    let settled = |rs: &[(u64, u64)]| rs.iter().position(|(_, spread)| (*spread as f64) < bound).map(|i| (i, rs[i].0));
    let (i, at) = settled(&rounds).ok_or("never synchronized")?;
    let (_, oracle_at) = settled(&oracle_rounds).ok_or("oracle never synchronized")?;
    if at > u64::from(horizon) || rounds[i..].iter().any(|(_, s)| *s as f64 >= bound) {
        return Err(format!("spread stays at or above {bound} ms within 50 periods"));
    }
    if at.abs_diff(oracle_at) > tick {
        return Err(format!("synchronized at {at} ms, oracle at {oracle_at} ms"));
    }
    let worst = rounds[i..].iter().map(|r| r.1).max().unwrap();
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("spread < {bound} ms from {at} ms on (oracle {oracle_at} ms), worst after {worst} ms, {took:.2?}"))
}

// Pinned from a noise-free `orbit_oracle` run of the orbit scene: a full
// revolution takes 38099 ms and the distance never departs from the target by
// more than 7.91 mm, so the band is held from t = 0 with no settling time.
const ORBIT_ORACLE_REVOLUTION_MS: u64 = 38_099;
const ORBIT_ORACLE_MAX_DEV_MM: f64 = 7.91;

fn orbit() -> Outcome {
    let cfg = load_scene("orbit.json");
    let orbiter = cfg.robots.iter().find(|r| matches!(r.behavior, Behavior::Controller(_))).unwrap();
    let Behavior::Controller(ControllerSpec::Orbit { anchor_id, desired_mm, band_mm }) = orbiter.behavior else {
        return Err("orbit scene has no orbit controller".into());
    };
    let oracle = orbit_oracle(
        (orbiter.x, orbiter.y, orbiter.heading_rad),
        desired_mm,
        band_mm,
        cfg.physics.v_straight,
        cfg.physics.omega_turn,
        cfg.physics.turn_pivot_mm,
        cfg.tick_ms,
        cfg.duration_ms,
    );
    if oracle.revolution_ms != Some(ORBIT_ORACLE_REVOLUTION_MS) {
        return Err(format!("oracle revolution {:?} ms moved from the pinned value", oracle.revolution_ms));
    }
    let oracle_dev = oracle.distances.iter().map(|(_, d)| (d - desired_mm).abs()).fold(0.0, f64::max);
    if (oracle_dev - ORBIT_ORACLE_MAX_DEV_MM).abs() > 0.005 {
        return Err(format!("oracle deviation {oracle_dev:.3} mm moved from the pinned value"));
    }
    let mut w = spawn_world(&cfg).map_err(|e| e.to_string())?;
    let anchor = w.robot(anchor_id).unwrap().pose;
    let (mut swept, mut angle, mut revolution) = (0.0, None::<f64>, None);
    let mut worst: f64 = 0.0;
    while !w.is_done() {
        step_world(&mut w);
        let p = w.robot(orbiter.id).unwrap().pose;
        let (dx, dy) = (p.x - anchor.x, p.y - anchor.y);
        let a = dy.atan2(dx);
        if let Some(prev) = angle {
            swept += (a - prev + PI).rem_euclid(2.0 * PI) - PI;
        }
        angle = Some(a);
        if revolution.is_none() && swept.abs() >= 2.0 * PI {
            revolution = Some(w.t_ms());
        }
        worst = worst.max((dx.hypot(dy) - desired_mm).abs());
    }
    let ideal = 2.0 * PI * desired_mm / cfg.physics.v_straight * 1000.0;
    let rev = revolution.ok_or("no full revolution")?;
    if (rev as f64 - ideal).abs() > 0.25 * ideal {
        return Err(format!("revolution took {rev} ms, expected {ideal:.0} ms ± 25%"));
    }
    if worst > band_mm {
        return Err(format!("distance strays {worst:.2} mm from {desired_mm} mm, band is {band_mm} mm"));
    }
    Ok(format!("revolution in {rev} ms (ideal {ideal:.0} ms), max deviation {worst:.2} mm ≤ {band_mm} mm"))
}

fn march() -> Outcome {
    let cfg = load_scene("march.json");
    let ids: Vec<u32> = cfg.robots.iter().map(|r| r.id).collect();
    let Behavior::Controller(ControllerSpec::March { period_ms, duty, .. }) = cfg.robots[0].behavior else {
        return Err("march scene robot 1 is not a march controller".into());
    };
    let trace = run(&cfg).map_err(|e| e.to_string())?;
    let iv = buzz_intervals(&trace, &ids);
    let starts: Vec<Vec<u64>> = ids.iter().map(|id| iv[id].iter().map(|i| i.0).collect()).collect();
    let rounds = firing_rounds(&starts, u64::from(period_ms) / 4);
    let tick = u64::from(cfg.tick_ms);
    let synced = rounds.iter().find(|(_, spread)| *spread <= tick).ok_or("beats never line up")?.0;
    let window = duty * f64::from(period_ms);
    let mut worst = f64::INFINITY;
    let mut beats = 0;
    for (k, a) in ids.iter().enumerate() {
        for b in &ids[k + 1..] {
            for x in iv[a].iter().filter(|i| i.0 >= synced) {
                let best = iv[b].iter().map(|y| overlap(*x, *y)).max().unwrap_or(0);
                worst = worst.min(best as f64 / window);
                beats += 1;
            }
        }
    }
    if beats == 0 || worst < 0.8 {
        return Err(format!("worst pairwise overlap {:.0}% of the duty window", worst * 100.0));
    }
    Ok(format!("in step from {synced} ms; worst pairwise overlap {:.1}% of the {window} ms window", worst * 100.0))
}

fn text() -> Outcome {
    let raw = fs::read_to_string(manifest_dir().join("data/no_war.txt")).map_err(|e| e.to_string())?;
    let lit = raw.chars().filter(|c| *c == '#').count();
    let bitmap = Bitmap::parse(&raw).map_err(|e| e.to_string())?;
    let spacing = 40.0;
    let pos = layout_text(&bitmap, spacing).map_err(|e| e.to_string())?;
    if pos.len() != lit {
        return Err(format!("{} positions for {lit} lit cells", pos.len()));
    }
    for (i, p) in pos.iter().enumerate() {
        for q in &pos[i + 1..] {
            if (p.0 - q.0).hypot(p.1 - q.1) < spacing - 1e-9 {
                return Err(format!("{p:?} and {q:?} are closer than {spacing} mm"));
            }
        }
    }
    let cfg = load_scene("no_war.json");
    let placed: Vec<(f64, f64)> = cfg.robots.iter().map(|r| (r.x, r.y)).collect();
    if placed != pos {
        return Err("scene robots are not at the laid-out positions".into());
    }
    let trace = run(&cfg).map_err(|e| e.to_string())?;
    let frames = render_frames(&cfg, &trace.events, 10).map_err(|e| e.to_string())?;
    let last = frames.last().ok_or("no frames")?;
    let view = Viewport::for_scene(&cfg);
    for r in &cfg.robots {
        let Behavior::Controller(ControllerSpec::TextPixel { color }) = r.behavior else {
            return Err(format!("robot {} is not a text pixel", r.id));
        };
        let (x, y) = view.to_pixel(r.x, r.y);
        if last.pixel(x, y) != color.to_rgb8() {
            return Err(format!("robot {} center pixel {:?}, expected {:?}", r.id, last.pixel(x, y), color.to_rgb8()));
        }
    }
    Ok(format!("{lit} lit cells, {lit} positions ≥ {spacing} mm apart, final frame colors match at every center"))
}

fn codegen_goldens() -> Outcome {
    let dir = manifest_dir().join("tests/codegen");
    let mut names: Vec<_> = fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ks"))
        .collect();
    names.sort();
    if names.len() != 10 {
        return Err(format!("expected 10 programs, found {}", names.len()));
    }
    for p in &names {
        let sp = parse_screenplay(&fs::read_to_string(p).unwrap()).map_err(|d| format!("{}: {}", p.display(), d[0]))?;
        let program = sp.programs.values().next().unwrap();
        let a = lower(program).map_err(|e| e.to_string())?;
        let c = emit_c(&a, &CodegenOptions::default()).map_err(|e| e.to_string())?;
        golden(&p.with_extension("c"), &c)?;
    }
    Ok("10 programs emit byte-identical C".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("grammar corpus and round trip", grammar_corpus),
        ("lowering equivalence", lowering_equivalence),
        ("blink until silence", blink),
        ("determinism", determinism),
        ("synchronization", synchronization),
        ("orbit", orbit),
        ("march", march),
        ("text", text),
        ("codegen goldens", codegen_goldens),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
