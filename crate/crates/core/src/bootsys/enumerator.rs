//! The enumerator: drives processor numbering and routing table construction
//! from the first processor.
//!
//! Numbering walks a list of enumerated processors in order, asking each to
//! probe its links. Routing then floods distance information from every
//! processor in turn. The enumerator keeps a balance of distance messages in
//! flight; a flood is complete when the origin has reported and the balance
//! is back to zero.

use log::debug;

use super::frame::{Frame, Inner};
use super::{BOOT_COMMAND_PORT, ENUMERATOR_REPORT_PORT};
use crate::fabric::port::FIRST_PROCESSOR;
use crate::fabric::{Cx, PortId, Word};
use crate::runtime::{Assembler, Behavior, Fault, Outbox, Step, StepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Start,
    Numbering,
    Routing,
    Finished,
}

/// Outcome of one routing flood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FloodRecord {
    pub origin: u16,
    pub credits: i64,
    pub debits: i64,
}

pub struct Enumerator {
    phase: Phase,
    reader: Assembler,
    out: Outbox,
    /// Processors in assignment order.
    pub list: Vec<u16>,
    index: usize,
    next_number: u16,
    origin: usize,
    balance: i64,
    origin_reported: bool,
    credits: i64,
    debits: i64,
    pub floods: Vec<FloodRecord>,
}

impl Default for Enumerator {
    fn default() -> Self {
        Self::new()
    }
}

impl Enumerator {
    pub fn new() -> Self {
        Enumerator {
            phase: Phase::Start,
            reader: Assembler::default(),
            out: Outbox::new(0),
            list: vec![FIRST_PROCESSOR],
            index: 0,
            next_number: FIRST_PROCESSOR + 1,
            origin: 0,
            balance: 0,
            origin_reported: false,
            credits: 0,
            debits: 0,
            floods: Vec::new(),
        }
    }

    /// Routing is complete and the routine transition has been requested.
    pub fn finished(&self) -> bool {
        self.phase == Phase::Finished
    }

    pub fn balance(&self) -> i64 {
        self.balance
    }

    fn command(&mut self, target: u16, inner: Inner) {
        let boot = PortId::local(0, 0, BOOT_COMMAND_PORT);
        self.out.push(boot, Frame::Routed { target, inner }.encode());
    }

    fn start_flood(&mut self) {
        let origin = self.list[self.origin];
        self.balance = 0;
        self.credits = 0;
        self.debits = 0;
        self.origin_reported = false;
        self.command(origin, Inner::Flood);
    }

    fn check_flood(&mut self, cx: &mut Cx<'_>) {
        if !self.origin_reported || self.balance != 0 {
            return;
        }
        let origin = self.list[self.origin];
        self.floods.push(FloodRecord { origin, credits: self.credits, debits: self.debits });
        cx.note("floods_completed", 1);
        self.origin += 1;
        if self.origin < self.list.len() {
            self.start_flood();
        } else {
            debug!("routing complete for {} processors", self.list.len());
            self.phase = Phase::Finished;
            self.command(FIRST_PROCESSOR, Inner::Done { processors: self.list.len() as u16 });
        }
    }

    fn report(&mut self, cx: &mut Cx<'_>, words: &[Word]) -> Result<(), Fault> {
        let inner = Inner::decode(words).ok_or_else(|| Fault::protocol("malformed report"))?;
        match (self.phase, inner) {
            (Phase::Numbering, Inner::Count { reporter, numbers }) => {
                if reporter != self.list[self.index] {
                    return Err(Fault::protocol(format!("count from {reporter} out of turn")));
                }
                self.next_number += numbers.len() as u16;
                self.list.extend(numbers);
                self.index += 1;
                if self.index < self.list.len() {
                    let target = self.list[self.index];
                    self.command(target, Inner::Enumerate { next_number: self.next_number });
                } else {
                    self.list.sort_unstable();
                    self.phase = Phase::Routing;
                    self.start_flood();
                }
            }
            (Phase::Routing, Inner::Credit { reporter, origin, delta }) => {
                if origin != self.list[self.origin] {
                    cx.note("late_flood_messages", 1);
                }
                self.balance += delta as i64;
                self.credits += delta as i64;
                if reporter == origin {
                    self.origin_reported = true;
                }
                self.command(reporter, Inner::Ack);
                self.check_flood(cx);
            }
            (Phase::Routing, Inner::Debit { origin, .. }) => {
                if origin != self.list[self.origin] {
                    cx.note("late_flood_messages", 1);
                }
                self.balance -= 1;
                self.debits += 1;
                if self.balance < 0 {
                    cx.note("balance_negative", 1);
                }
                self.check_flood(cx);
            }
            (_, inner) => {
                cx.note("late_flood_messages", 1);
                debug!("report {inner:?} ignored");
            }
        }
        Ok(())
    }
}

impl Behavior for Enumerator {
    fn name(&self) -> &str {
        "enumerate"
    }

    fn port_count(&self) -> u16 {
        2
    }

    fn privileged_only_ports(&self) -> &'static [u16] {
        &[ENUMERATOR_REPORT_PORT]
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        if self.phase == Phase::Start {
            self.phase = Phase::Numbering;
            self.command(FIRST_PROCESSOR, Inner::Enumerate { next_number: self.next_number });
            return Ok(Step::Busy);
        }
        let sent = self.out.pump(cx)?;
        let mut read = false;
        if let Some(t) = cx.recv(ENUMERATOR_REPORT_PORT) {
            read = true;
            if let Some(words) = self.reader.feed(t) {
                self.report(cx, &words)?;
            }
        }
        Ok(if sent || read { Step::Busy } else { Step::Idle })
    }
}
