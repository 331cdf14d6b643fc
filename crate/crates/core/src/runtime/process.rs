//! Process behaviors: host-coded guarded state machines.
//!
//! A behavior is stepped by the engine on its core whenever the core is not
//! stalled. Each step may consume at most one token and emit a bounded token
//! sequence. Output is buffered per process; while any of it is still waiting
//! for downstream buffer space the core stalls and is not stepped.

use std::any::Any;
use std::fmt;

use crate::fabric::{Cx, Word};

/// Outcome of one behavior step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Nothing was ready; the core consumed no cycle.
    Idle,
    /// Work was done.
    Busy,
    /// The behavior reached its final state.
    Stop,
}

/// Reason word carried in termination exception messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u32)]
pub enum Reason {
    Stopped = 0,
    ConnectWhileConnected = 1,
    SendWhileIdle = 2,
    Privilege = 3,
    Protocol = 4,
    Capability = 5,
    Killed = 6,
    NoSuchPort = 7,
}

impl Reason {
    pub fn word(self) -> Word {
        self as Word
    }

    pub fn from_word(w: Word) -> Option<Reason> {
        use Reason::*;
        [Stopped, ConnectWhileConnected, SendWhileIdle, Privilege, Protocol, Capability, Killed, NoSuchPort]
            .into_iter()
            .find(|r| r.word() == w)
    }
}

/// A process abort with diagnostic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault {
    pub reason: Reason,
    pub detail: String,
}

impl Fault {
    pub fn new(reason: Reason, detail: impl Into<String>) -> Self {
        Fault { reason, detail: detail.into() }
    }

    pub fn protocol(detail: impl Into<String>) -> Self {
        Fault::new(Reason::Protocol, detail)
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.reason, self.detail)
    }
}

impl std::error::Error for Fault {}

pub type StepResult = Result<Step, Fault>;

/// What a guard waits for at the head of a port's inbox.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardKind {
    Word,
    End,
    Any,
}

/// One element of an event set: a local port and the token kind awaited there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guard {
    pub port: u16,
    pub kind: GuardKind,
}

impl Guard {
    pub fn word(port: u16) -> Self {
        Guard { port, kind: GuardKind::Word }
    }

    pub fn end(port: u16) -> Self {
        Guard { port, kind: GuardKind::End }
    }

    pub fn any(port: u16) -> Self {
        Guard { port, kind: GuardKind::Any }
    }
}

pub trait AsAny {
    fn as_any(&self) -> &dyn Any;
}

impl<T: Any> AsAny for T {
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// A process program.
pub trait Behavior: AsAny {
    fn name(&self) -> &str;

    /// Number of local ports the process owns.
    fn port_count(&self) -> u16;

    /// Ports that only accept connections from privileged senders.
    fn privileged_only_ports(&self) -> &'static [u16] {
        &[]
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult;
}

impl fmt::Debug for dyn Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Behavior({})", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reason_words_roundtrip() {
        for w in 0..8 {
            assert_eq!(Reason::from_word(w).unwrap().word(), w);
        }
        assert_eq!(Reason::from_word(99), None);
    }
}
