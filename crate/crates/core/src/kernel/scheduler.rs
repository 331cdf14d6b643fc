//! Per-node scheduler on core 0: allocates memory and cores, starts user
//! processes, handles their termination exceptions, and keeps the dispatcher
//! informed about the node's free resources.

use std::fmt::Write as _;

use log::{debug, warn};

use super::ports::{self, scheduler::*};
use super::{Report, ReportKind};
use crate::fabric::port::node_letter;
use crate::fabric::{text_words, words_text, Cx, PortId, StartOptions, Word};
use crate::runtime::{Assembler, Behavior, Fault, Guard, NodeResources, Outbox, Reason, Step, StepResult, USER_BASE, USER_CORES, USER_END};

pub struct Scheduler {
    announced: bool,
    pub resources: NodeResources,
    readers: [Assembler; 3],
    out: Outbox,
    pub spawned: u64,
    pub terminated: u64,
}

impl Default for Scheduler {
    fn default() -> Self {
        Self::new()
    }
}

impl Scheduler {
    pub fn new() -> Self {
        Scheduler {
            announced: false,
            resources: NodeResources::new(),
            readers: Default::default(),
            out: Outbox::new(OUT),
            spawned: 0,
            terminated: 0,
        }
    }

    fn report(&mut self, cx: &Cx<'_>, kind: ReportKind) {
        let (largest, second) = self.resources.two_largest();
        let r = Report {
            scheduler: cx.port_id(START),
            cores_free: self.resources.cores_free() as Word,
            largest,
            second,
            kind,
        };
        self.out.push(ports::dispatcher_report(), r.encode());
    }

    fn start(&mut self, cx: &mut Cx<'_>, words: &[Word]) -> Result<(), Fault> {
        let [requester, dimension, code, data, name @ ..] = words else {
            return Err(Fault::protocol("malformed start"));
        };
        let requester = PortId::from_word(*requester);
        let name = words_text(name);
        let ack = match self.resources.reserve(&name, *code, *data, *dimension, requester) {
            Ok(rec) => {
                let core = rec.core;
                let behavior = cx.instantiate(&name, *dimension)?;
                let opts = StartOptions { privileged: false, exception_handler: Some(cx.port_id(EXCEPTION)) };
                match behavior.map(|b| cx.start(cx.node(), core, b, opts)).transpose()?.flatten() {
                    Some(ctrl) => {
                        debug!("started {name} on core {core}");
                        self.spawned += 1;
                        cx.note("user_spawns", 1);
                        if let Some(r) = self.resources.record_mut(core) {
                            r.control = Some(ctrl);
                        }
                        ctrl.word()
                    }
                    None => {
                        warn!("cannot start {name} on core {core}");
                        self.resources.terminate(core).map_err(|e| Fault::protocol(e.to_string()))?;
                        0
                    }
                }
            }
            Err(e) => {
                debug!("start of {name} refused: {e}");
                0
            }
        };
        self.out.push(requester, vec![ack]);
        self.report(cx, ReportKind::AfterStart);
        Ok(())
    }

    fn exception(&mut self, cx: &mut Cx<'_>, words: &[Word]) -> Result<(), Fault> {
        let &[core, reason] = words else { return Err(Fault::protocol("malformed exception")) };
        let core = u8::try_from(core).ok().filter(|c| USER_CORES.contains(c));
        match core.map(|c| self.resources.terminate(c)) {
            Some(Ok(rec)) => {
                debug!("{} on core {} ended: {:?}", rec.program, rec.core, Reason::from_word(reason));
                self.terminated += 1;
                cx.note("user_exits", 1);
                self.report(cx, ReportKind::AfterExit);
            }
            _ => {
                warn!("exception for unknown core {words:?} ignored");
                cx.note("exceptions_ignored", 1);
            }
        }
        Ok(())
    }

    /// The node listing shown by the inspection tool.
    pub fn listing(&self, processor: u16, node: u8, clock: (u32, u32)) -> String {
        let mut s = format!(" {processor}{}: {USER_BASE:04x}..{USER_END:04x} t:{:08x} c:{:08x}\n", node_letter(node), clock.0, clock.1);
        for core in USER_CORES {
            match self.resources.record(core) {
                Some(r) => {
                    let _ = writeln!(s, " {core}: {}/{}", r.code, r.data);
                }
                None => {
                    let _ = writeln!(s, " {core}:");
                }
            }
        }
        s
    }

    fn query(&mut self, cx: &mut Cx<'_>, words: &[Word]) -> Result<(), Fault> {
        let &[reply] = words else { return Err(Fault::protocol("malformed query")) };
        let processor = cx.own_processor().unwrap_or(0);
        let text = self.listing(processor, cx.node(), cx.node_clock());
        self.out.push(PortId::from_word(reply), text_words(&text));
        Ok(())
    }
}

impl Behavior for Scheduler {
    fn name(&self) -> &str {
        "schedule"
    }

    fn port_count(&self) -> u16 {
        COUNT
    }

    fn privileged_only_ports(&self) -> &'static [u16] {
        &[START, EXCEPTION]
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        if !self.announced {
            self.announced = true;
            self.report(cx, ReportKind::Initial);
        }
        let sent = self.out.pump(cx)?;
        let guards = [Guard::any(EXCEPTION), Guard::any(START), Guard::any(QUERY)];
        let Some((i, token)) = cx.await_any(&guards) else {
            return Ok(if sent { Step::Busy } else { Step::Idle });
        };
        let port = guards[i].port;
        if let Some(words) = self.readers[i].feed(token) {
            match port {
                EXCEPTION => self.exception(cx, &words)?,
                START => self.start(cx, &words)?,
                _ => self.query(cx, &words)?,
            }
        }
        Ok(Step::Busy)
    }
}
