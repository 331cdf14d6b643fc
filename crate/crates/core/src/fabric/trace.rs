//! Deterministic event trace.
//!
//! Every engine event is folded into a 64-bit FNV-1a hash over a fixed byte
//! encoding, so two runs compare by hash alone. Text lines are kept only when
//! tracing is switched on.

use std::fmt;

use super::{PortId, Token, Word};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Boot { instance: usize, first: bool },
    BootDiscarded { instance: usize, link: u8 },
    Start { instance: usize, node: u8, core: u8, name: String, privileged: bool },
    Stop { instance: usize, node: u8, core: u8, reason: Word },
    Connect { src: PortId, dest: PortId },
    Deliver { instance: usize, dest: PortId, token: Token },
    Dropped { instance: usize, dest: PortId, token: Token },
    Exception { instance: usize, node: u8, core: u8, reason: Word },
    RouteSet { instance: usize, processor: u16, link: u8 },
    Console { words: usize },
}

impl Event {
    fn tag(&self) -> u8 {
        match self {
            Event::Boot { .. } => 1,
            Event::BootDiscarded { .. } => 2,
            Event::Start { .. } => 3,
            Event::Stop { .. } => 4,
            Event::Connect { .. } => 5,
            Event::Deliver { .. } => 6,
            Event::Dropped { .. } => 7,
            Event::Exception { .. } => 8,
            Event::RouteSet { .. } => 9,
            Event::Console { .. } => 10,
        }
    }

    fn fold(&self, h: &mut Fnv) {
        h.byte(self.tag());
        match self {
            Event::Boot { instance, first } => {
                h.word(*instance as u64);
                h.byte(*first as u8);
            }
            Event::BootDiscarded { instance, link } => {
                h.word(*instance as u64);
                h.byte(*link);
            }
            Event::Start { instance, node, core, name, privileged } => {
                h.word(*instance as u64);
                h.bytes(&[*node, *core, *privileged as u8]);
                h.bytes(name.as_bytes());
            }
            Event::Stop { instance, node, core, reason } | Event::Exception { instance, node, core, reason } => {
                h.word(*instance as u64);
                h.bytes(&[*node, *core]);
                h.word(*reason as u64);
            }
            Event::Connect { src, dest } => {
                h.word(src.word() as u64);
                h.word(dest.word() as u64);
            }
            Event::Deliver { instance, dest, token } | Event::Dropped { instance, dest, token } => {
                h.word(*instance as u64);
                h.word(dest.word() as u64);
                match token {
                    Token::Data(w) => h.word(*w as u64),
                    Token::End => h.byte(0xEE),
                }
            }
            Event::RouteSet { instance, processor, link } => {
                h.word(*instance as u64);
                h.word(*processor as u64);
                h.byte(*link);
            }
            Event::Console { words } => h.word(*words as u64),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Boot { instance, first } => write!(f, "boot i{instance} first={first}"),
            Event::BootDiscarded { instance, link } => write!(f, "boot-discard i{instance} link{link}"),
            Event::Start { instance, node, core, name, privileged } => {
                write!(f, "start i{instance} n{node} c{core} {name}{}", if *privileged { " (sys)" } else { "" })
            }
            Event::Stop { instance, node, core, reason } => write!(f, "stop i{instance} n{node} c{core} reason={reason}"),
            Event::Connect { src, dest } => write!(f, "connect {src:?} -> {dest:?}"),
            Event::Deliver { instance, dest, token } => write!(f, "deliver i{instance} {dest:?} {token:?}"),
            Event::Dropped { instance, dest, token } => write!(f, "drop i{instance} {dest:?} {token:?}"),
            Event::Exception { instance, node, core, reason } => {
                write!(f, "exception i{instance} n{node} c{core} reason={reason}")
            }
            Event::RouteSet { instance, processor, link } => write!(f, "route i{instance} {processor} -> link{link}"),
            Event::Console { words } => write!(f, "console {words} words"),
        }
    }
}

struct Fnv(u64);

impl Fnv {
    fn byte(&mut self, b: u8) {
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(FNV_PRIME);
    }

    fn bytes(&mut self, bs: &[u8]) {
        for b in bs {
            self.byte(*b);
        }
        self.byte(0xFF);
    }

    fn word(&mut self, w: u64) {
        for b in w.to_be_bytes() {
            self.byte(b);
        }
    }
}

#[derive(Debug)]
pub struct Trace {
    hash: u64,
    events: u64,
    lines: Option<Vec<String>>,
}

impl Trace {
    pub fn new(keep_lines: bool) -> Self {
        Trace { hash: FNV_OFFSET, events: 0, lines: keep_lines.then(Vec::new) }
    }

    pub fn record(&mut self, step: u64, event: Event) {
        let mut h = Fnv(self.hash);
        h.word(step);
        event.fold(&mut h);
        self.hash = h.0;
        self.events += 1;
        if let Some(lines) = &mut self.lines {
            lines.push(format!("{step:>8} {event}"));
        }
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Drains the text lines collected so far.
    pub fn take_lines(&mut self) -> Vec<String> {
        self.lines.as_mut().map(std::mem::take).unwrap_or_default()
    }
}
