//! A complete system: engine, standard programs, boot and a line-driven
//! console session.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::bootsys::{default_rom, BootLoader, DEFAULT_INIT};
use crate::fabric::{words_text, text_words, Engine, EngineConfig, FileStore, MemoryFiles, Topology, Word};
use crate::kernel::ports::CONSOLE_CORE;
use crate::kernel::Console;
use crate::userland::{standard_files, standard_registry};

pub const DEFAULT_MAX_TICKS: u64 = 20_000_000;

#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub topology: Topology,
    pub engine: EngineConfig,
    pub boot_rom: Vec<Word>,
    pub max_ticks: u64,
    /// Instance 0 boots from the ROM. Hosts that only extend another
    /// host's network over sockets clear this and boot over their links.
    pub first: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            topology: Topology::torus(2, 2),
            engine: EngineConfig::default(),
            boot_rom: default_rom(DEFAULT_INIT),
            max_ticks: DEFAULT_MAX_TICKS,
            first: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("tick limit of {0} reached")]
    TickLimit(u64),
    #[error("initial program did not start")]
    NoInit,
}

/// A file store that falls back to built-in files for reads.
pub struct Overlay<S> {
    pub base: S,
    builtin: BTreeMap<String, Vec<Word>>,
}

impl<S: FileStore> Overlay<S> {
    pub fn new(base: S, builtin: BTreeMap<String, Vec<Word>>) -> Self {
        Overlay { base, builtin }
    }
}

impl<S: FileStore> FileStore for Overlay<S> {
    fn read(&self, name: &str) -> Option<Vec<Word>> {
        self.base.read(name).or_else(|| self.builtin.get(name).cloned())
    }

    fn write(&mut self, name: &str, words: &[Word]) -> bool {
        self.base.write(name, words)
    }
}

/// Called when a step made no progress; returns true if more may arrive
/// from outside, so running should continue.
pub type IdleWait = Box<dyn FnMut() -> bool>;

pub struct System {
    engine: Engine,
    max_ticks: u64,
    idle_wait: Option<IdleWait>,
}

impl System {
    /// Builds and powers up a system. Standard program files are visible
    /// through `files` unless it holds files of the same name.
    pub fn new<S: FileStore + 'static>(cfg: &SystemConfig, files: S) -> Self {
        let mut engine = Engine::new(&cfg.topology, cfg.engine.clone(), Arc::new(standard_registry()));
        engine.set_files(Box::new(Overlay::new(files, standard_files())));
        engine.set_first_stage_loader(Box::new(BootLoader));
        engine.set_boot_rom(cfg.boot_rom.clone());
        if cfg.first {
            engine.first_stage_boot();
        }
        System { engine, max_ticks: cfg.max_ticks, idle_wait: None }
    }

    /// Default configuration with in-memory files.
    pub fn with_files(files: &[(&str, &str)]) -> Self {
        let mut m = MemoryFiles::new();
        for (name, text) in files {
            m.insert_text(name, text);
        }
        System::new(&SystemConfig::default(), m)
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn set_idle_wait(&mut self, wait: IdleWait) {
        self.idle_wait = Some(wait);
    }

    /// Runs until nothing moves.
    pub fn settle(&mut self) -> Result<(), RunError> {
        loop {
            if self.engine.steps() >= self.max_ticks {
                return Err(RunError::TickLimit(self.max_ticks));
            }
            if !self.engine.advance().progress && !self.idle_wait.as_mut().is_some_and(|wait| wait()) {
                return Ok(());
            }
        }
    }

    /// Completes initialization; fails if the initial program is not running.
    pub fn boot(&mut self) -> Result<(), RunError> {
        self.settle()?;
        let console = self.engine.behavior::<Console>(0, 0, CONSOLE_CORE);
        match console.and_then(|c| c.launched) {
            Some(_) => Ok(()),
            None => Err(RunError::NoInit),
        }
    }

    /// Types one line at the console and waits for the system to settle.
    pub fn line(&mut self, line: &str) -> Result<(), RunError> {
        let mut words = text_words(line);
        words.push('\n' as Word);
        self.engine.console().push_input(&words);
        self.settle()
    }

    pub fn end_of_input(&mut self) -> Result<(), RunError> {
        self.engine.console().push_eof();
        self.settle()
    }

    /// Boots, types each line, then ends the input.
    pub fn run_script<'a>(&mut self, lines: impl IntoIterator<Item = &'a str>) -> Result<(), RunError> {
        self.boot()?;
        for l in lines {
            self.line(l)?;
        }
        self.end_of_input()
    }

    pub fn take_output(&mut self) -> String {
        words_text(&self.engine.console().take_output())
    }

    pub fn output(&mut self) -> String {
        words_text(self.engine.console().output())
    }

    pub fn read_file(&self, name: &str) -> Option<String> {
        self.engine.files().read(name).map(|w| words_text(&w))
    }
}
