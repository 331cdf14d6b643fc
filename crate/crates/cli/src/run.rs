//! The `run` command.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::time::Duration;

use log::info;
use nopsys::bootsys::{default_rom, DEFAULT_INIT};
use nopsys::fabric::{text_words, EngineConfig, HostDir, MemoryFiles};
use nopsys::system::{RunError, System, SystemConfig, DEFAULT_MAX_TICKS};
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::socket::{LinkState, SocketLink};

/// How long the first host keeps running after its links fall silent.
const LINK_GRACE: Duration = Duration::from_millis(300);
const CONNECT_PATIENCE: Duration = Duration::from_secs(10);

#[derive(Debug, Default)]
pub struct RunArgs {
    pub config: PathBuf,
    pub script: Option<PathBuf>,
    pub trace: bool,
    pub max_ticks: Option<u64>,
    pub listen: Vec<String>,
    pub connect: Vec<String>,
    pub summary: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("boot ROM {0}: {1}")]
    Rom(PathBuf, io::Error),
    #[error("{0}")]
    Run(#[from] RunError),
    #[error("{0}: {1}")]
    Io(String, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Rom(..) | CliError::Run(RunError::NoInit) => 4,
            CliError::Run(RunError::TickLimit(_)) => 5,
            CliError::Io(..) => 6,
        }
    }
}

fn connect_sockets(cfg: &Config, args: &RunArgs, system: &mut System) -> Result<Vec<std::sync::Arc<LinkState>>, CliError> {
    let endpoints = args.listen.len() + args.connect.len();
    if endpoints != cfg.sockets.len() {
        return Err(CliError::Usage(format!(
            "configuration declares {} socket links but {endpoints} --listen/--connect addresses were given",
            cfg.sockets.len()
        )));
    }
    let listens = args.listen.iter().map(|a| (true, a));
    let connects = args.connect.iter().map(|a| (false, a));
    let mut states = Vec::new();
    for (&(p, l), (listen, addr)) in cfg.sockets.iter().zip(listens.chain(connects)) {
        let link = if listen {
            SocketLink::listen(addr, |a| {
                eprintln!("listening on {a}");
            })
        } else {
            SocketLink::connect(addr, CONNECT_PATIENCE)
        }
        .map_err(|e| CliError::Io(format!("socket link {p}.{l} at {addr}"), e))?;
        info!("processor {p} link {l} is carried by {addr}");
        states.push(link.state());
        system.engine_mut().attach_external(p, l, Box::new(link));
    }
    Ok(states)
}

fn flush(system: &mut System, trace: bool) -> Result<(), CliError> {
    let out = system.take_output();
    let mut stdout = io::stdout().lock();
    stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Io("stdout".into(), e))?;
    if trace {
        let mut stderr = io::stderr().lock();
        for line in system.engine_mut().take_trace_lines() {
            let _ = writeln!(stderr, "{line}");
        }
    }
    Ok(())
}

fn input_lines(args: &RunArgs) -> Result<Box<dyn Iterator<Item = io::Result<String>>>, CliError> {
    Ok(match &args.script {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            let lines: Vec<_> = text.lines().map(|l| Ok(l.trim_end_matches('\r').to_string())).collect();
            Box::new(lines.into_iter())
        }
        None => Box::new(io::stdin().lock().lines()),
    })
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = Config::load(&args.config)?;
    let boot_rom = match &cfg.boot_rom {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Rom(path.clone(), e))?;
            text_words(&text)
        }
        None => default_rom(DEFAULT_INIT),
    };
    let trace = cfg.trace || args.trace;
    let sys_cfg = SystemConfig {
        topology: cfg.topology().map_err(ConfigError::from)?,
        engine: EngineConfig { buffer_capacity: cfg.capacity, trace },
        boot_rom,
        max_ticks: args.max_ticks.or(cfg.max_ticks).unwrap_or(DEFAULT_MAX_TICKS),
        first: !cfg.secondary,
    };
    let mut system = match &cfg.files {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(ConfigError::Line(0, format!("files directory {} does not exist", dir.display())).into());
            }
            System::new(&sys_cfg, HostDir::new(dir))
        }
        None => System::new(&sys_cfg, MemoryFiles::new()),
    };

    let links = connect_sockets(&cfg, args, &mut system)?;
    if !links.is_empty() {
        let secondary = cfg.secondary;
        system.set_idle_wait(Box::new(move || {
            std::thread::sleep(Duration::from_millis(1));
            let open = links.iter().any(|l| l.connected());
            if secondary {
                open
            } else {
                open && links.iter().any(|l| l.idle_for() < LINK_GRACE)
            }
        }));
    }

    let result = if cfg.secondary { system.settle() } else { session(&mut system, args, trace) };
    flush(&mut system, trace)?;
    if trace {
        eprintln!("trace hash {:016x} ({} events)", system.engine().trace_hash(), system.engine().trace_events());
    }
    if args.summary {
        summary(&system);
    }
    Ok(result?)
}

fn session(system: &mut System, args: &RunArgs, trace: bool) -> Result<(), RunError> {
    system.boot()?;
    let _ = flush(system, trace);
    let lines = match input_lines(args) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            Box::new(std::iter::empty())
        }
    };
    for line in lines {
        let Ok(line) = line else { break };
        system.line(&line)?;
        let _ = flush(system, trace);
    }
    system.end_of_input()
}

fn summary(system: &System) {
    let e = system.engine();
    for i in 0..e.instances() {
        match e.number(i) {
            Some(n) => eprintln!("instance {i} number {n}"),
            None => eprintln!("instance {i} unnumbered"),
        }
    }
    eprintln!("steps {}", e.steps());
    eprintln!("trace {:016x}", e.trace_hash());
}
