//! The communication fabric: port addressing, tokens, links, switching and
//! the deterministic engine that drives everything.

mod cx;
mod engine;
pub mod peripheral;
pub mod port;
pub mod token;
pub mod topology;
pub mod trace;

pub use cx::Cx;
pub use engine::{Engine, EngineConfig, ExternalLink, FirstStageLoader, LinkItem, ProcessInfo, StartOptions, Stats, StepReport};
pub use peripheral::{ConsoleInput, ConsoleLine, FileStore, HostDir, MemoryFiles};
pub use port::{decode_port_id, encode_port_id, node_letter, PortError, PortFields, PortId, FIRST_PROCESSOR};
pub use token::{text_words, words_text, Token, Word};
pub use topology::{LinkSpec, Topology, TopologyError, LINKS_PER_PROCESSOR};
