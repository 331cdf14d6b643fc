//! System initialization: first-stage boot, boot image distribution,
//! processor enumeration, routing table construction and the transition to
//! routine operation.

mod boot;
mod distributor;
mod enumerator;
pub mod frame;

use thiserror::Error;

pub use boot::Boot;
pub use distributor::Distributor;
pub use enumerator::{Enumerator, FloodRecord};

use crate::fabric::{text_words, words_text, FirstStageLoader, PortId, Word};
use crate::runtime::Behavior;
use frame::Frame;

/// First line of every boot ROM.
pub const ROM_MAGIC: &str = "NOPBOOT1";
pub const DEFAULT_INIT: &str = "init.nop";

pub const BOOT_CORE: u8 = 0;
pub const ENUMERATOR_CORE: u8 = 2;
/// Distributor for link k runs on core DISTRIBUTOR_CORE + k of node 0.
pub const DISTRIBUTOR_CORE: u8 = 3;

/// Boot process port receiving commands.
pub const BOOT_COMMAND_PORT: u16 = 5;
/// Distributor port taking frames to transmit.
pub const LINK_FRAME_PORT: u16 = 0;
pub const ENUMERATOR_REPORT_PORT: u16 = 1;

/// Processor-relative port of a link's distributor.
pub fn distributor_port(link: u8) -> PortId {
    PortId::local(0, DISTRIBUTOR_CORE + link, LINK_FRAME_PORT)
}

/// Processor-relative boot port receiving frames that arrived on a link.
pub fn boot_frame_port(link: u8) -> PortId {
    PortId::local(0, BOOT_CORE, 1 + link as u16)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RomError {
    #[error("boot ROM does not start with {ROM_MAGIC}")]
    Magic,
    #[error("boot ROM line {0}: {1:?} not understood")]
    Line(usize, String),
}

/// What a boot process carries: its image and what it learned from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootConfig {
    pub first: bool,
    pub image: Vec<Word>,
    /// Program file of the initial user process.
    pub init: String,
}

impl BootConfig {
    /// Parses a boot image: the magic line followed by optional
    /// `init <file>` lines; blank lines and `#` comments are ignored.
    pub fn parse(image: &[Word], first: bool) -> Result<Self, RomError> {
        let text = words_text(image);
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(ROM_MAGIC) {
            return Err(RomError::Magic);
        }
        let mut init = DEFAULT_INIT.to_string();
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once(char::is_whitespace) {
                Some(("init", name)) if !name.trim().is_empty() => init = name.trim().to_string(),
                _ => return Err(RomError::Line(i + 2, line.to_string())),
            }
        }
        Ok(BootConfig { first, image: image.to_vec(), init })
    }
}

/// The default boot ROM contents.
pub fn default_rom(init: &str) -> Vec<Word> {
    text_words(&format!("{ROM_MAGIC}\ninit {init}\n"))
}

/// Loads boot processes from the ROM and from link frames.
#[derive(Debug, Default, Clone, Copy)]
pub struct BootLoader;

impl FirstStageLoader for BootLoader {
    fn from_rom(&self, rom: &[Word]) -> Box<dyn Behavior> {
        let config = BootConfig::parse(rom, true).unwrap_or_else(|e| {
            log::error!("{e}; booting with defaults");
            BootConfig { first: true, image: default_rom(DEFAULT_INIT), init: DEFAULT_INIT.into() }
        });
        Box::new(Boot::new(config))
    }

    fn from_frame(&self, frame: &[Word]) -> Option<Box<dyn Behavior>> {
        match Frame::decode(frame)? {
            Frame::Boot { first: false, image } => {
                let config = BootConfig::parse(&image, false).ok()?;
                Some(Box::new(Boot::new(config)))
            }
            _ => None,
        }
    }
}
