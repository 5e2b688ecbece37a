//! `kiloscript` command-line front end.
//!
//! Exit codes: 0 success, 1 diagnostics reported, 2 usage error (including
//! unreadable inputs), 3 internal error.

use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use kiloscript::codegen::{emit_c, CodegenOptions};
use kiloscript::parser::{codes, parse_with_diagnostics, Pos};
use kiloscript::render::{render_frames, write_frames, RenderError};
use kiloscript::sim::{run, SceneConfig, SceneError, Trace};
use kiloscript::{lower, Diagnostic, Severity};

#[derive(Parser)]
#[command(name = "kiloscript", version, about = "Screenplay compiler and swarm simulator for Kilobot-class robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a screenplay.
    Check { path: PathBuf },
    /// Emit kilolib C code for one role.
    Compile {
        path: PathBuf,
        /// Role to compile; may be omitted when the screenplay has one role.
        #[arg(long)]
        role: Option<String>,
        /// Output file (standard output when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        ticks_per_second: u32,
    },
    /// Run a scene and write its trace.
    Simulate {
        scene_path: PathBuf,
        /// Overrides the scene's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Draw a trace as numbered PPM frames.
    Render {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        fps: u32,
    },
}

enum Failure {
    Reported,
    Usage(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

type Outcome = Result<(), Failure>;

struct Reporter {
    color: bool,
}

impl Reporter {
    fn from_env() -> Self {
        let color = match std::env::var("KILOSCRIPT_COLOR").as_deref() {
            Ok("never") => false,
            _ => io::stderr().is_terminal(),
        };
        Reporter { color }
    }

    fn diagnostic(&self, file: &Path, d: &Diagnostic) {
        let sev = match (self.color, d.severity) {
            (false, s) => s.to_string(),
            (true, Severity::Error) => "\x1b[31merror\x1b[0m".to_string(),
            (true, Severity::Warning) => "\x1b[33mwarning\x1b[0m".to_string(),
        };
        eprintln!("{}:{}:{}: {sev}[{}]: {}", file.display(), d.line, d.column, d.code, d.message);
    }

    /// Prints all diagnostics; fails when any is an error.
    fn report(&self, file: &Path, diags: &[Diagnostic]) -> Outcome {
        for d in diags {
            self.diagnostic(file, d);
        }
        if diags.iter().any(Diagnostic::is_error) {
            Err(Failure::Reported)
        } else {
            Ok(())
        }
    }

    fn error(&self, file: &Path, message: impl std::fmt::Display) -> Failure {
        let sev = if self.color { "\x1b[31merror\x1b[0m" } else { "error" };
        eprintln!("{}: {sev}: {message}", file.display());
        Failure::Reported
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn check(rep: &Reporter, path: &Path) -> Outcome {
    let source = read_input(path)?;
    let (_, diags) = parse_with_diagnostics(&source);
    rep.report(path, &diags)
}

fn compile(rep: &Reporter, path: &Path, role: Option<&str>, out: Option<&Path>, tps: u32) -> Outcome {
    let source = read_input(path)?;
    let (sp, diags) = parse_with_diagnostics(&source);
    rep.report(path, &diags)?;
    let sp = sp.expect("no errors were reported");
    let role = match role {
        Some(r) => r.to_string(),
        None if sp.programs.len() == 1 => sp.programs.keys().next().unwrap().clone(),
        None => {
            let names: Vec<&str> = sp.programs.keys().map(String::as_str).collect();
            return Err(Failure::Usage(format!("pick a role with --role (one of: {})", names.join(", "))));
        }
    };
    let Some(program) = sp.program(&role) else {
        let d = Diagnostic::error(Pos::START, codes::UNDEFINED_ROLE, format!("no role named '{role}'"));
        return rep.report(path, &[d]);
    };
    let automaton = lower(program).map_err(|e| rep.error(path, format!("role '{role}': {e}")))?;
    let opts = CodegenOptions { ticks_per_second: tps, ..CodegenOptions::default() };
    let c = emit_c(&automaton, &opts).map_err(|e| rep.error(path, e))?;
    match out {
        Some(file) => write_output(file, c.as_bytes()),
        None => {
            io::stdout().write_all(c.as_bytes()).context("cannot write to standard output")?;
            Ok(())
        }
    }
}

fn load_scene(rep: &Reporter, path: &Path) -> Result<SceneConfig, Failure> {
    let text = read_input(path)?;
    SceneConfig::from_json(&text, path.parent()).map_err(|e| scene_failure(rep, path, e))
}

fn scene_failure(rep: &Reporter, path: &Path, e: SceneError) -> Failure {
    match e {
        SceneError::Screenplay(diags) => rep.report(path, &diags).err().unwrap_or(Failure::Reported),
        other => rep.error(path, other),
    }
}

fn simulate(rep: &Reporter, path: &Path, seed: Option<u64>, trace_out: Option<&Path>) -> Outcome {
    let mut cfg = load_scene(rep, path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let warnings = cfg.validate().map_err(|e| scene_failure(rep, path, e))?;
    rep.report(path, &warnings)?;
    let trace = run(&cfg).map_err(|e| scene_failure(rep, path, e))?;
    for n in &trace.notes {
        eprintln!("{}: {n}", path.display());
    }
    if let Some(file) = trace_out {
        write_output(file, trace.to_text().as_bytes())?;
    }
    println!("robots={} duration_ms={} events={}", cfg.robots.len(), cfg.duration_ms, trace.events.len());
    Ok(())
}

fn render(rep: &Reporter, trace_path: &Path, scene_path: &Path, out: &Path, fps: u32) -> Outcome {
    if fps == 0 {
        return Err(Failure::Usage("--fps must be positive".into()));
    }
    let text = read_input(trace_path)?;
    let cfg = load_scene(rep, scene_path)?;
    cfg.validate().map_err(|e| scene_failure(rep, scene_path, e))?;
    let events = Trace::parse(&text).map_err(|e| rep.error(trace_path, e))?;
    let frames = render_frames(&cfg, &events, fps).map_err(|e| rep.error(trace_path, e))?;
    write_frames(&frames, out).map_err(|e| match e {
        RenderError::Io { .. } => Failure::Internal(e.into()),
        other => rep.error(trace_path, other),
    })?;
    println!("frames={}", frames.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rep = Reporter::from_env();
    let outcome = std::panic::catch_unwind(|| match &cli.command {
        Command::Check { path } => check(&rep, path),
        Command::Compile { path, role, out, ticks_per_second } => {
            compile(&rep, path, role.as_deref(), out.as_deref(), *ticks_per_second)
        }
        Command::Simulate { scene_path, seed, trace } => simulate(&rep, scene_path, *seed, trace.as_deref()),
        Command::Render { trace, scene, out, fps } => render(&rep, trace, scene, out, *fps),
    });
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Reported)) => ExitCode::from(1),
        Ok(Err(Failure::Usage(msg))) => {
            eprintln!("kiloscript: {msg}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Internal(e))) => {
            eprintln!("kiloscript: internal error: {e:#}");
            ExitCode::from(3)
        }
        Err(_) => ExitCode::from(3),
    }
}
