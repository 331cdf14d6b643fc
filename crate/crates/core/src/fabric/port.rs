//! Port identifiers.
//!
//! A port identifier is one machine word naming a channel endpoint anywhere in
//! the system:
//!
//! ```text
//!  31 | 30 ........ 16 | 15 14 | 13 .. 11 | 10 ....... 0
//! priv|   processor    | node  |   core   |  local port
//! ```
//!
//! Enumerated processors are numbered from 8 upwards. The processor field value
//! 0 is reserved for processor-relative addresses used before a processor has
//! learned its own number.

use std::fmt;

use thiserror::Error;

use super::Word;

pub const PRIVILEGED_BIT: Word = 1 << 31;
pub const FIRST_PROCESSOR: u16 = 8;
pub const MAX_PROCESSOR: u16 = (1 << 15) - 1;
pub const NODES_PER_PROCESSOR: usize = 4;
pub const CORES_PER_NODE: usize = 8;
pub const MAX_LOCAL_PORT: u16 = (1 << 11) - 1;

/// Processor field value for an address relative to the sending processor.
pub const LOCAL_PROCESSOR: u16 = 0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PortError {
    #[error("processor number {0} outside 8..32768")]
    Processor(u32),
    #[error("node index {0} outside 0..4")]
    Node(u32),
    #[error("core index {0} outside 0..8")]
    Core(u32),
    #[error("local port {0} outside 0..2048")]
    LocalPort(u32),
}

/// Decoded fields of a port identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PortFields {
    pub privileged: bool,
    pub processor: u16,
    pub node: u8,
    pub core: u8,
    pub local_port: u16,
}

/// Encodes the fields of a port identifier into a word.
pub fn encode_port_id(
    privileged: bool,
    processor: u32,
    node: u32,
    core: u32,
    local_port: u32,
) -> Result<Word, PortError> {
    if !(FIRST_PROCESSOR as u32..=MAX_PROCESSOR as u32).contains(&processor) {
        return Err(PortError::Processor(processor));
    }
    if node >= NODES_PER_PROCESSOR as u32 {
        return Err(PortError::Node(node));
    }
    if core >= CORES_PER_NODE as u32 {
        return Err(PortError::Core(core));
    }
    if local_port > MAX_LOCAL_PORT as u32 {
        return Err(PortError::LocalPort(local_port));
    }
    Ok(pack(privileged, processor as u16, node as u8, core as u8, local_port as u16))
}

/// Splits a word into port identifier fields. Pure bit extraction.
pub fn decode_port_id(w: Word) -> PortFields {
    PortFields {
        privileged: w & PRIVILEGED_BIT != 0,
        processor: ((w >> 16) & 0x7FFF) as u16,
        node: ((w >> 14) & 0x3) as u8,
        core: ((w >> 11) & 0x7) as u8,
        local_port: (w & 0x7FF) as u16,
    }
}

fn pack(privileged: bool, processor: u16, node: u8, core: u8, local_port: u16) -> Word {
    let p = if privileged { PRIVILEGED_BIT } else { 0 };
    p | (processor as Word) << 16 | (node as Word) << 14 | (core as Word) << 11 | local_port as Word
}

/// System-wide address of a channel endpoint.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortId(Word);

impl PortId {
    pub fn new(privileged: bool, processor: u16, node: u8, core: u8, local_port: u16) -> Result<Self, PortError> {
        encode_port_id(privileged, processor as u32, node as u32, core as u32, local_port as u32).map(PortId)
    }

    /// A processor-relative address, valid only on the processor that uses it.
    pub fn local(node: u8, core: u8, local_port: u16) -> Self {
        debug_assert!((node as usize) < NODES_PER_PROCESSOR && (core as usize) < CORES_PER_NODE);
        PortId(pack(false, LOCAL_PROCESSOR, node, core, local_port & MAX_LOCAL_PORT))
    }

    /// Unchecked construction used by the engine for addresses it derives itself.
    pub(crate) fn raw(privileged: bool, processor: u16, node: u8, core: u8, local_port: u16) -> Self {
        PortId(pack(privileged, processor, node, core, local_port))
    }

    pub fn from_word(w: Word) -> Self {
        PortId(w)
    }

    pub fn word(self) -> Word {
        self.0
    }

    pub fn fields(self) -> PortFields {
        decode_port_id(self.0)
    }

    pub fn privileged(self) -> bool {
        self.0 & PRIVILEGED_BIT != 0
    }

    pub fn processor(self) -> u16 {
        self.fields().processor
    }

    pub fn node(self) -> u8 {
        self.fields().node
    }

    pub fn core(self) -> u8 {
        self.fields().core
    }

    pub fn local_port(self) -> u16 {
        self.fields().local_port
    }

    /// The address with the privilege bit cleared; endpoint identity ignores it.
    pub fn address(self) -> PortId {
        PortId(self.0 & !PRIVILEGED_BIT)
    }

    pub fn is_local(self) -> bool {
        self.processor() == LOCAL_PROCESSOR
    }

    /// Same endpoint, optionally ignoring the privilege bit.
    pub fn same_endpoint(self, other: PortId) -> bool {
        self.address() == other.address()
    }
}

impl fmt::Debug for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.fields();
        write!(
            f,
            "{}{}{}.c{}.p{}",
            if p.privileged { "!" } else { "" },
            p.processor,
            node_letter(p.node),
            p.core,
            p.local_port
        )
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08x}", self.0)
    }
}

/// Node letters a..d as used in the inspection tools.
pub fn node_letter(node: u8) -> char {
    (b'a' + node) as char
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_encodings() {
        assert_eq!(encode_port_id(false, 8, 0, 0, 1).unwrap(), 0x0008_0001);
        assert_eq!(encode_port_id(true, 8, 0, 3, 0).unwrap(), 0x8008_1800);
        assert_eq!(encode_port_id(false, 9, 2, 5, 7).unwrap(), 0x0009_A807);
    }

    #[test]
    fn literal_decodings() {
        let f = decode_port_id(0x0008_0001);
        assert_eq!((f.privileged, f.processor, f.node, f.core, f.local_port), (false, 8, 0, 0, 1));
        let f = decode_port_id(0x8008_1800);
        assert_eq!((f.privileged, f.processor, f.node, f.core, f.local_port), (true, 8, 0, 3, 0));
    }

    #[test]
    fn out_of_range_fields() {
        assert_eq!(encode_port_id(false, 7, 0, 0, 0), Err(PortError::Processor(7)));
        assert_eq!(encode_port_id(false, 1 << 15, 0, 0, 0), Err(PortError::Processor(1 << 15)));
        assert_eq!(encode_port_id(false, 8, 4, 0, 0), Err(PortError::Node(4)));
        assert_eq!(encode_port_id(false, 8, 0, 8, 0), Err(PortError::Core(8)));
        assert_eq!(encode_port_id(false, 8, 0, 0, 2048), Err(PortError::LocalPort(2048)));
    }

    #[test]
    fn debug_form() {
        let p = PortId::new(true, 9, 1, 0, 2).unwrap();
        assert_eq!(format!("{p:?}"), "!9b.c0.p2");
        assert_eq!(p.address().privileged(), false);
        assert!(p.same_endpoint(p.address()));
    }
}
