//! The boot process on node 0, core 0 of every processor.
//!
//! It starts the link distributors, forwards its own image to all
//! neighbours, and then serves the initialization protocols: answering and
//! issuing probes, relaying frames, and flooding distance information. On
//! the first processor it also hosts the console and the enumerator, and at
//! the end of initialization it brings up the routine services.

use std::collections::{BTreeMap, VecDeque};

use log::debug;

use super::enumerator::Enumerator;
use super::frame::{Frame, Inner};
use super::{distributor_port, BootConfig, Distributor, BOOT_COMMAND_PORT, DISTRIBUTOR_CORE, ENUMERATOR_CORE, ENUMERATOR_REPORT_PORT};
use crate::fabric::port::{FIRST_PROCESSOR, NODES_PER_PROCESSOR};
use crate::fabric::{text_words, Cx, PortId, StartOptions, Word, LINKS_PER_PROCESSOR};
use crate::kernel::{ports, Console, Dispatcher, FileServer, Loader, Scheduler};
use crate::runtime::{Assembler, Behavior, Fault, Guard, Outbox, Step, StepResult};

const PORTS: u16 = 6;
const OUT: u16 = 0;

fn system() -> StartOptions {
    StartOptions { privileged: true, exception_handler: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Start,
    Running,
    /// Killed processes retire at the end of the step; services start on
    /// their cores afterwards.
    Clearing(u16),
    Leaving,
}

#[derive(Debug, Clone)]
struct Probing {
    next_number: u16,
    link: u8,
    seq: Word,
    awaiting: bool,
    assigned: Vec<u16>,
}

pub struct Boot {
    config: BootConfig,
    phase: Phase,
    links: [bool; LINKS_PER_PROCESSOR],
    readers: [Assembler; 5],
    out: Outbox,
    number: Option<u16>,
    probing: Option<Probing>,
    seq: Word,
    /// Minimum hop count seen per flood origin.
    pub best_hops: BTreeMap<u16, Word>,
    awaiting_ack: Option<u16>,
    stash: VecDeque<(Option<u8>, Frame)>,
}

impl Boot {
    pub fn new(config: BootConfig) -> Self {
        Boot {
            config,
            phase: Phase::Start,
            links: [false; LINKS_PER_PROCESSOR],
            readers: Default::default(),
            out: Outbox::new(OUT),
            number: None,
            probing: None,
            seq: 0,
            best_hops: BTreeMap::new(),
            awaiting_ack: None,
            stash: VecDeque::new(),
        }
    }

    pub fn is_first(&self) -> bool {
        self.config.first
    }

    fn connected(&self) -> impl Iterator<Item = u8> + '_ {
        (0..LINKS_PER_PROCESSOR as u8).filter(|&l| self.links[l as usize])
    }

    fn degree(&self) -> Word {
        self.connected().count() as Word
    }

    fn send_link(&mut self, link: u8, frame: &Frame) {
        self.out.push(distributor_port(link), frame.encode());
    }

    fn broadcast(&mut self, frame: &Frame) {
        for l in self.connected().collect::<Vec<_>>() {
            self.send_link(l, frame);
        }
    }

    fn own(&self) -> Result<u16, Fault> {
        self.number.ok_or_else(|| Fault::protocol("frame requires a processor number"))
    }

    fn start(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        for l in 0..LINKS_PER_PROCESSOR as u8 {
            self.links[l as usize] = cx.link_connected(l)?;
            cx.start(0, DISTRIBUTOR_CORE + l, Box::new(Distributor::new(l)), system())?;
        }
        if self.config.first {
            cx.set_own_number(FIRST_PROCESSOR)?;
            self.number = Some(FIRST_PROCESSOR);
            cx.start(0, ports::CONSOLE_CORE, Box::new(Console::new()), system())?;
            cx.start(0, ENUMERATOR_CORE, Box::new(Enumerator::new()), system())?;
        }
        let image = Frame::Boot { first: false, image: self.config.image.clone() };
        self.broadcast(&image);
        Ok(())
    }

    fn handle(&mut self, cx: &mut Cx<'_>, link: Option<u8>, frame: Frame) -> Result<(), Fault> {
        match frame {
            Frame::Boot { .. } => {}
            Frame::Probe { prober, candidate, seq } => {
                let link = link.ok_or_else(|| Fault::protocol("probe from local source"))?;
                let fresh = self.number.is_none();
                if fresh {
                    cx.set_own_number(candidate)?;
                    self.number = Some(candidate);
                    debug!("adopted number {candidate}");
                }
                let number = self.own()?;
                self.broadcast(&Frame::Reply { prober, number, recv_link: link, fresh, seq });
            }
            Frame::Reply { prober, number, recv_link, fresh, seq } => {
                let matches = self.number == Some(prober)
                    && self.probing.as_ref().is_some_and(|p| p.awaiting && p.seq == seq && Some(p.link) == link);
                if !matches {
                    cx.note("replies_ignored", 1);
                    return Ok(());
                }
                let link = link.expect("matched probe link");
                self.send_link(link, &Frame::Confirm { prober, number, recv_link, fresh });
                if number != prober && cx.route(number).is_none() {
                    cx.set_route(number, link)?;
                }
                let p = self.probing.as_mut().expect("probing");
                if fresh {
                    p.assigned.push(number);
                }
                p.awaiting = false;
                p.link += 1;
                self.advance_probe_or_report(cx)?;
            }
            Frame::Confirm { prober, number, recv_link, .. } => {
                if self.number != Some(number) {
                    return Ok(());
                }
                if cx.route(prober).is_none() {
                    cx.set_route(prober, recv_link)?;
                }
                if number != FIRST_PROCESSOR && cx.route(FIRST_PROCESSOR).is_none() {
                    cx.set_route(FIRST_PROCESSOR, recv_link)?;
                }
            }
            Frame::Routed { target, inner } => {
                if self.number == Some(target) {
                    self.handle_inner(cx, inner)?;
                } else if let Some(l) = cx.route(target) {
                    self.send_link(l, &Frame::Routed { target, inner });
                } else {
                    cx.note("frames_unroutable", 1);
                }
            }
            Frame::Up { inner } => self.up(cx, link, inner)?,
            Frame::Establish { origin, hops } => {
                if self.awaiting_ack.is_some() {
                    self.stash.push_back((link, Frame::Establish { origin, hops }));
                    return Ok(());
                }
                cx.note("establish_consumed", 1);
                let own = self.own()?;
                let link = link.ok_or_else(|| Fault::protocol("establish from local source"))?;
                let improves = origin != own && self.best_hops.get(&origin).is_none_or(|&b| hops < b);
                if improves {
                    self.best_hops.insert(origin, hops);
                    cx.set_route(origin, link)?;
                    let delta = self.degree() - 1;
                    self.awaiting_ack = Some(origin);
                    self.up(cx, None, Inner::Credit { reporter: own, origin, delta })?;
                } else {
                    self.up(cx, None, Inner::Debit { reporter: own, origin })?;
                }
            }
        }
        Ok(())
    }

    /// Moves a report toward the first processor, installing routes for
    /// newly numbered processors along the way.
    fn up(&mut self, cx: &mut Cx<'_>, link: Option<u8>, inner: Inner) -> Result<(), Fault> {
        if let (Inner::Count { numbers, .. }, Some(l)) = (&inner, link) {
            for &n in numbers {
                if cx.route(n).is_none() {
                    cx.set_route(n, l)?;
                }
            }
        }
        if self.number == Some(FIRST_PROCESSOR) {
            let dest = PortId::local(0, ENUMERATOR_CORE, ENUMERATOR_REPORT_PORT);
            self.out.push(dest, inner.encode());
        } else if let Some(l) = cx.route(FIRST_PROCESSOR) {
            self.send_link(l, &Frame::Up { inner });
        } else {
            return Err(Fault::protocol("no route toward the first processor"));
        }
        Ok(())
    }

    fn handle_inner(&mut self, cx: &mut Cx<'_>, inner: Inner) -> Result<(), Fault> {
        match inner {
            Inner::Enumerate { next_number } => {
                self.probing = Some(Probing { next_number, link: 0, seq: 0, awaiting: false, assigned: Vec::new() });
                self.advance_probe_or_report(cx)?;
            }
            Inner::Flood => {
                let own = self.own()?;
                self.best_hops.insert(own, 0);
                self.awaiting_ack = Some(own);
                let delta = self.degree();
                self.up(cx, None, Inner::Credit { reporter: own, origin: own, delta })?;
            }
            Inner::Ack => {
                let origin = self.awaiting_ack.take().ok_or_else(|| Fault::protocol("unexpected ack"))?;
                let hops = self.best_hops[&origin] + 1;
                cx.note("establish_sent", self.degree() as i64);
                self.broadcast(&Frame::Establish { origin, hops });
                while self.awaiting_ack.is_none() {
                    let Some((link, frame)) = self.stash.pop_front() else { break };
                    self.handle(cx, link, frame)?;
                }
            }
            Inner::Done { processors } if self.config.first => self.enter_routine_first(cx, processors)?,
            Inner::Routine if !self.config.first => self.enter_routine(cx)?,
            other => return Err(Fault::protocol(format!("unexpected command {other:?}"))),
        }
        Ok(())
    }

    fn advance_probe_or_report(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        self.advance_probe()?;
        let done = self.probing.as_ref().is_some_and(|p| !p.awaiting);
        if done {
            let p = self.probing.take().expect("probing");
            let own = self.own()?;
            self.up(cx, None, Inner::Count { reporter: own, numbers: p.assigned })?;
        }
        Ok(())
    }

    /// Probes the next connected link, if any is left.
    fn advance_probe(&mut self) -> Result<(), Fault> {
        let own = self.own()?;
        let Some(p) = self.probing.as_mut() else { return Ok(()) };
        while (p.link as usize) < LINKS_PER_PROCESSOR && !self.links[p.link as usize] {
            p.link += 1;
        }
        if (p.link as usize) < LINKS_PER_PROCESSOR {
            self.seq += 1;
            p.seq = self.seq;
            p.awaiting = true;
            let frame = Frame::Probe { prober: own, candidate: p.next_number + p.assigned.len() as u16, seq: p.seq };
            let link = p.link;
            self.send_link(link, &frame);
        }
        Ok(())
    }

    fn stop_init_processes(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        for l in 0..LINKS_PER_PROCESSOR as u8 {
            cx.kill(0, DISTRIBUTOR_CORE + l)?;
        }
        Ok(())
    }

    fn start_schedulers(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        for node in 1..NODES_PER_PROCESSOR as u8 {
            cx.start(node, ports::SCHEDULER_CORE, Box::new(Scheduler::new()), system())?;
        }
        Ok(())
    }

    fn enter_routine_first(&mut self, cx: &mut Cx<'_>, processors: u16) -> Result<(), Fault> {
        debug!("routine operation with {processors} processors");
        self.stop_init_processes(cx)?;
        cx.kill(0, ENUMERATOR_CORE)?;
        self.phase = Phase::Clearing(processors);
        Ok(())
    }

    fn start_services(&mut self, cx: &mut Cx<'_>, processors: u16) -> Result<(), Fault> {
        let numbers: Vec<u16> = (FIRST_PROCESSOR..FIRST_PROCESSOR + processors).collect();
        cx.start(0, ports::DISPATCHER_CORE, Box::new(Dispatcher::new(numbers.clone())), system())?;
        cx.start(0, ports::LOADER_CORE, Box::new(Loader::new()), system())?;
        cx.start(0, ports::FILESERVER_CORE, Box::new(FileServer::new()), system())?;
        self.start_schedulers(cx)?;
        for &p in &numbers[1..] {
            let dest = PortId::new(false, p, 0, 0, BOOT_COMMAND_PORT).expect("numbered processor");
            self.out.push(dest, Frame::Routed { target: p, inner: Inner::Routine }.encode());
        }
        self.out.push(ports::console_launch(), text_words(&self.config.init));
        self.phase = Phase::Leaving;
        Ok(())
    }

    fn enter_routine(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        self.stop_init_processes(cx)?;
        self.start_schedulers(cx)?;
        self.phase = Phase::Leaving;
        Ok(())
    }

    fn read_frame(&mut self, cx: &mut Cx<'_>) -> Result<bool, Fault> {
        let guards: Vec<Guard> = (1..PORTS).map(Guard::any).collect();
        let Some((i, token)) = cx.await_any(&guards) else { return Ok(false) };
        let Some(words) = self.readers[i].feed(token) else { return Ok(true) };
        let link = (i < LINKS_PER_PROCESSOR).then_some(i as u8);
        match Frame::decode(&words) {
            Some(frame) => self.handle(cx, link, frame)?,
            None => cx.note("frames_malformed", 1),
        }
        Ok(true)
    }
}

impl Behavior for Boot {
    fn name(&self) -> &str {
        "boot"
    }

    fn port_count(&self) -> u16 {
        PORTS
    }

    fn privileged_only_ports(&self) -> &'static [u16] {
        &[1, 2, 3, 4, BOOT_COMMAND_PORT]
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        match self.phase {
            Phase::Start => {
                self.start(cx)?;
                self.phase = Phase::Running;
                Ok(Step::Busy)
            }
            Phase::Running => {
                let sent = self.out.pump(cx)?;
                let read = self.read_frame(cx)?;
                Ok(if sent || read { Step::Busy } else { Step::Idle })
            }
            Phase::Clearing(processors) => {
                let busy = (ENUMERATOR_CORE..DISTRIBUTOR_CORE + LINKS_PER_PROCESSOR as u8).any(|c| cx.core_busy(0, c));
                if !busy {
                    self.start_services(cx, processors)?;
                }
                Ok(Step::Busy)
            }
            Phase::Leaving => {
                if self.out.pump(cx)? {
                    return Ok(Step::Busy);
                }
                if !self.out.is_empty() {
                    return Ok(Step::Idle);
                }
                if self.config.first {
                    Ok(Step::Stop)
                } else {
                    cx.exec(Box::new(Scheduler::new()), system())?;
                    Ok(Step::Busy)
                }
            }
        }
    }
}
