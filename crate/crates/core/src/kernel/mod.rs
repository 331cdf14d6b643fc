//! Routine operation services: console, dispatcher, loader, file server and
//! the per-node schedulers. Each is one privileged process with fixed ports.

mod console;
pub mod dispatcher;
pub mod fileserver;
mod loader;
pub mod ports;
mod scheduler;

pub use console::Console;
pub use dispatcher::{Dispatcher, NodeRecord};
pub use fileserver::FileServer;
pub use loader::Loader;
pub use scheduler::Scheduler;

use crate::fabric::{text_words, words_text, PortId, Word};

/// Loader to dispatcher: a program to start on behalf of `requester`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartRequest {
    pub requester: PortId,
    pub code: Word,
    pub static_data: Word,
    pub per_dimension: Word,
    pub dimension: Word,
    pub name: String,
}

impl StartRequest {
    pub fn encode(&self) -> Vec<Word> {
        let mut v = vec![self.requester.word(), self.code, self.static_data, self.per_dimension, self.dimension];
        v.extend(text_words(&self.name));
        v
    }

    pub fn decode(w: &[Word]) -> Option<Self> {
        let [requester, code, static_data, per_dimension, dimension, name @ ..] = w else { return None };
        if name.is_empty() {
            return None;
        }
        Some(StartRequest {
            requester: PortId::from_word(*requester),
            code: *code,
            static_data: *static_data,
            per_dimension: *per_dimension,
            dimension: *dimension,
            name: words_text(name),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Initial = 0,
    AfterStart = 1,
    AfterExit = 2,
}

/// Scheduler to dispatcher: current node resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Report {
    pub scheduler: PortId,
    pub cores_free: Word,
    pub largest: Word,
    pub second: Word,
    pub kind: ReportKind,
}

impl Report {
    pub fn encode(&self) -> Vec<Word> {
        vec![self.scheduler.word(), self.cores_free, self.largest, self.second, self.kind as Word]
    }

    pub fn decode(w: &[Word]) -> Option<Self> {
        let &[scheduler, cores_free, largest, second, kind] = w else { return None };
        let kind = match kind {
            0 => ReportKind::Initial,
            1 => ReportKind::AfterStart,
            2 => ReportKind::AfterExit,
            _ => return None,
        };
        Some(Report { scheduler: PortId::from_word(scheduler), cores_free, largest, second, kind })
    }
}
