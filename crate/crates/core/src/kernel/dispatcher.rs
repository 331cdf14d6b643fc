//! The dispatcher: tracks every node's free cores and its two largest free
//! memory regions, and routes start requests to a scheduler that can take them.
//!
//! A node's record is zeroed from the moment a start request is forwarded to
//! it until that scheduler answers with its post-start report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::debug;

use super::ports::{self, dispatcher::*};
use super::{Report, ReportKind, StartRequest};
use crate::fabric::port::{node_letter, FIRST_PROCESSOR, NODES_PER_PROCESSOR};
use crate::fabric::{text_words, Cx, PortId, Word};
use crate::runtime::{Assembler, Behavior, Fault, Guard, Outbox, Step, StepResult};

/// Query kinds.
pub const QUERY_TABLE: Word = 0;
pub const QUERY_PROCESSORS: Word = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeRecord {
    pub cores_free: Word,
    pub largest: Word,
    pub second: Word,
}

impl NodeRecord {
    /// Whether code and data regions of the given sizes fit, taking code first.
    pub fn fits(&self, code: Word, data: Word) -> bool {
        self.cores_free >= 1
            && self.largest >= code
            && (self.largest - code >= data || self.second >= data)
    }
}

pub struct Dispatcher {
    processors: Vec<u16>,
    pub records: BTreeMap<(u16, u8), NodeRecord>,
    /// Start requests forwarded and not yet answered, per node.
    pub pending: BTreeMap<(u16, u8), u32>,
    initial_reports: usize,
    readers: [Assembler; 3],
    out: Outbox,
    pub starts_forwarded: u64,
    pub starts_refused: u64,
}

impl Dispatcher {
    pub fn new(processors: Vec<u16>) -> Self {
        let records = processors
            .iter()
            .flat_map(|&p| (0..NODES_PER_PROCESSOR as u8).map(move |n| ((p, n), NodeRecord::default())))
            .collect();
        Dispatcher {
            processors,
            records,
            pending: BTreeMap::new(),
            initial_reports: 0,
            readers: Default::default(),
            out: Outbox::new(OUT),
            starts_forwarded: 0,
            starts_refused: 0,
        }
    }

    fn expected_reports(&self) -> usize {
        self.records.len() - 1
    }

    /// All schedulers have announced themselves.
    pub fn ready(&self) -> bool {
        self.initial_reports >= self.expected_reports()
    }

    /// First node, in (processor, node) order, able to take the request.
    pub fn select(&self, code: Word, data: Word) -> Option<(u16, u8)> {
        self.records
            .iter()
            .filter(|(&k, _)| k != (FIRST_PROCESSOR, 0) && !self.pending.contains_key(&k))
            .find(|(_, r)| r.fits(code, data))
            .map(|(&k, _)| k)
    }

    pub fn table_text(&self) -> String {
        let mut s = String::new();
        for (&(p, n), r) in &self.records {
            let _ = writeln!(s, "{p}{}: {}/{:04x}/{:04x}", node_letter(n), r.cores_free, r.largest, r.second);
        }
        s
    }

    fn start(&mut self, words: &[Word]) -> Result<(), Fault> {
        let Some(req) = StartRequest::decode(words) else {
            return Err(Fault::protocol("malformed start request"));
        };
        let data = req.static_data.checked_add(req.per_dimension.checked_mul(req.dimension).unwrap_or(Word::MAX));
        let choice = data.and_then(|d| self.select(req.code, d).map(|k| (k, d)));
        match choice {
            Some(((p, n), data)) => {
                debug!("start {} on {p}{}", req.name, node_letter(n));
                self.records.insert((p, n), NodeRecord::default());
                *self.pending.entry((p, n)).or_insert(0) += 1;
                self.starts_forwarded += 1;
                let dest = ports::scheduler_port(p, n, super::ports::scheduler::START).expect("numbered node");
                let mut msg = vec![req.requester.word(), req.dimension, req.code, data];
                msg.extend(text_words(&req.name));
                self.out.push(dest, msg);
            }
            None => {
                self.starts_refused += 1;
                self.out.push(req.requester, vec![0]);
            }
        }
        Ok(())
    }

    fn report(&mut self, words: &[Word]) -> Result<(), Fault> {
        let r = Report::decode(words).ok_or_else(|| Fault::protocol("malformed report"))?;
        let key = (r.scheduler.processor(), r.scheduler.node());
        if !self.records.contains_key(&key) || key == (FIRST_PROCESSOR, 0) {
            return Err(Fault::protocol(format!("report from unknown node {:?}", r.scheduler)));
        }
        let record = NodeRecord { cores_free: r.cores_free, largest: r.largest, second: r.second };
        match r.kind {
            ReportKind::Initial => {
                self.initial_reports += 1;
                self.records.insert(key, record);
            }
            ReportKind::AfterStart => {
                let left = self.pending.get_mut(&key).map(|c| {
                    *c -= 1;
                    *c
                });
                if left == Some(0) {
                    self.pending.remove(&key);
                    self.records.insert(key, record);
                }
            }
            ReportKind::AfterExit => {
                if !self.pending.contains_key(&key) {
                    self.records.insert(key, record);
                }
            }
        }
        Ok(())
    }

    fn query(&mut self, words: &[Word]) -> Result<(), Fault> {
        let [reply, kind] = words else { return Err(Fault::protocol("malformed query")) };
        let reply = PortId::from_word(*reply);
        match *kind {
            QUERY_TABLE => self.out.push(reply, text_words(&self.table_text())),
            QUERY_PROCESSORS => self.out.push(reply, vec![self.processors.len() as Word]),
            _ => self.out.push(reply, Vec::new()),
        }
        Ok(())
    }
}

impl Behavior for Dispatcher {
    fn name(&self) -> &str {
        "dispatch"
    }

    fn port_count(&self) -> u16 {
        COUNT
    }

    fn privileged_only_ports(&self) -> &'static [u16] {
        &[REPORT]
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        let sent = self.out.pump(cx)?;
        let mut guards = vec![Guard::any(REPORT), Guard::any(QUERY)];
        if self.ready() {
            guards.push(Guard::any(START));
        }
        let Some((i, token)) = cx.await_any(&guards) else {
            return Ok(if sent { Step::Busy } else { Step::Idle });
        };
        let port = guards[i].port;
        if let Some(words) = self.readers[port as usize].feed(token) {
            match port {
                REPORT => self.report(&words)?,
                QUERY => self.query(&words)?,
                _ => self.start(&words)?,
            }
        }
        Ok(Step::Busy)
    }
}
