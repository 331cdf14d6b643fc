//! The deterministic engine.
//!
//! One call to [`Engine::advance`] is one engine step:
//!
//! 1. every link moves at most one item from its sending queue to the peer
//!    switch, which routes it onward or delivers it locally;
//! 2. pending termination exceptions are handed to their handlers;
//! 3. buffered process output is admitted into the network as destination
//!    buffer space (credit) allows;
//! 4. every non-stalled core is stepped, processors in index order, nodes
//!    0..3, cores 0..7;
//! 5. stopped processes are retired;
//! 6. all node tick counters advance.
//!
//! Nothing in a step depends on host timing or hash ordering, so a fixed
//! configuration and input script always yields the same event trace.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use log::{debug, warn};

use super::peripheral::{ConsoleLine, FileStore, MemoryFiles};
use super::port::{CORES_PER_NODE, LOCAL_PROCESSOR, NODES_PER_PROCESSOR};
use super::topology::{Topology, LINKS_PER_PROCESSOR};
use super::trace::{Event, Trace};
use super::{Cx, PortId, Token, Word};
use crate::runtime::{Behavior, Reason, Registry, Step};

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Inbox capacity per port, in tokens.
    pub buffer_capacity: usize,
    /// Keep human-readable trace lines.
    pub trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { buffer_capacity: 8, trace: false }
    }
}

/// One item on an external link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkItem {
    /// Link-level token, seen only by the link's distribution process.
    Raw(Token),
    /// Switched token addressed to a port. `credited` tokens had receiver
    /// buffer space reserved when they entered the network.
    Routed { dest: PortId, src: PortId, token: Token, credited: bool },
}

/// A link whose far end lives outside this engine (e.g. a socket).
pub trait ExternalLink: Send {
    fn send(&mut self, item: LinkItem);
    fn poll(&mut self) -> Option<LinkItem>;
    fn connected(&self) -> bool;
}

/// Turns boot images into boot processes.
pub trait FirstStageLoader {
    /// The boot process for the first processor, loaded from the boot ROM.
    fn from_rom(&self, rom: &[Word]) -> Box<dyn Behavior>;
    /// A boot process for a link frame, or `None` when the frame is not a boot image.
    fn from_frame(&self, frame: &[Word]) -> Option<Box<dyn Behavior>>;
}

/// Options for starting a process on a core.
#[derive(Debug, Clone, Copy, Default)]
pub struct StartOptions {
    pub privileged: bool,
    /// Port receiving the termination exception message.
    pub exception_handler: Option<PortId>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub data_admitted: u64,
    pub data_delivered: u64,
    pub data_dropped: u64,
    pub user_starts: u64,
    pub exceptions: u64,
    pub boots: u64,
}

#[derive(Debug, Clone)]
pub struct ProcessInfo {
    pub instance: usize,
    pub node: u8,
    pub core: u8,
    pub name: String,
    pub privileged: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Out {
    pub src: u16,
    pub dest: PortId,
    /// `None` is the connection header.
    pub token: Option<Token>,
}

#[derive(Debug, Default)]
pub(crate) struct PortState {
    pub inbox: VecDeque<Token>,
    pub in_flight: usize,
    pub owner: Option<PortId>,
    pub staged: VecDeque<(PortId, Token)>,
    pub privileged_only: bool,
    pub bound: Option<PortId>,
    pub open: bool,
}

pub(crate) struct Slot {
    pub behavior: Option<Box<dyn Behavior>>,
    pub name: String,
    pub ports: Vec<PortState>,
    pub outq: VecDeque<Out>,
    pub opts: StartOptions,
    pub stopping: Option<Reason>,
}

impl Slot {
    fn new(behavior: Box<dyn Behavior>, opts: StartOptions) -> Self {
        let mut ports: Vec<PortState> = (0..behavior.port_count()).map(|_| PortState::default()).collect();
        for &p in behavior.privileged_only_ports() {
            if let Some(ps) = ports.get_mut(p as usize) {
                ps.privileged_only = true;
            }
        }
        Slot { name: behavior.name().to_string(), behavior: Some(behavior), ports, outq: VecDeque::new(), opts, stopping: None }
    }
}

#[derive(Default)]
pub(crate) struct Node {
    pub cores: [Option<Slot>; CORES_PER_NODE],
    pub ticks: u32,
    pub cycles: u32,
}

#[derive(Default)]
pub(crate) struct Processor {
    pub number: Option<u16>,
    pub booted: bool,
    pub table: BTreeMap<u16, u8>,
    pub nodes: [Node; NODES_PER_PROCESSOR],
    pub link_out: [VecDeque<LinkItem>; LINKS_PER_PROCESSOR],
    pub raw_in: [VecDeque<Token>; LINKS_PER_PROCESSOR],
    loader_frames: [Vec<Word>; LINKS_PER_PROCESSOR],
}

enum Route {
    Local,
    Link(u8),
    Missing,
}

enum Target {
    Port { instance: usize },
    Void,
    Remote,
}

/// Result of one engine step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepReport {
    /// Anything at all happened: a token moved, a process did work, a process retired.
    pub progress: bool,
}

pub struct Engine {
    pub(crate) cfg: EngineConfig,
    pub(crate) procs: Vec<Processor>,
    peers: Vec<[Option<(usize, u8)>; LINKS_PER_PROCESSOR]>,
    external: Vec<[Option<Box<dyn ExternalLink>>; LINKS_PER_PROCESSOR]>,
    pub(crate) numbers: BTreeMap<u16, usize>,
    pub(crate) step: u64,
    pub(crate) trace: Trace,
    pub(crate) registry: Arc<Registry>,
    pub(crate) console: ConsoleLine,
    pub(crate) files: Box<dyn FileStore>,
    pub(crate) boot_rom: Vec<Word>,
    loader: Option<Box<dyn FirstStageLoader>>,
    pending_exceptions: VecDeque<(usize, PortId, [Word; 2])>,
    pub(crate) stats: Stats,
    pub(crate) counters: BTreeMap<&'static str, i64>,
    progress: bool,
}

impl Engine {
    pub fn new(topology: &Topology, cfg: EngineConfig, registry: Arc<Registry>) -> Self {
        let n = topology.processors();
        Engine {
            trace: Trace::new(cfg.trace),
            cfg,
            procs: (0..n).map(|_| Processor::default()).collect(),
            peers: topology.peers(),
            external: (0..n).map(|_| Default::default()).collect(),
            numbers: BTreeMap::new(),
            step: 0,
            registry,
            console: ConsoleLine::default(),
            files: Box::new(MemoryFiles::new()),
            boot_rom: Vec::new(),
            loader: None,
            pending_exceptions: VecDeque::new(),
            stats: Stats::default(),
            counters: BTreeMap::new(),
            progress: false,
        }
    }

    pub fn set_files(&mut self, files: Box<dyn FileStore>) {
        self.files = files;
    }

    pub fn files(&self) -> &dyn FileStore {
        self.files.as_ref()
    }

    pub fn set_boot_rom(&mut self, rom: Vec<Word>) {
        self.boot_rom = rom;
    }

    pub fn set_first_stage_loader(&mut self, loader: Box<dyn FirstStageLoader>) {
        self.loader = Some(loader);
    }

    pub fn attach_external(&mut self, instance: usize, link: u8, ext: Box<dyn ExternalLink>) {
        self.external[instance][link as usize] = Some(ext);
    }

    pub fn console(&mut self) -> &mut ConsoleLine {
        &mut self.console
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// Boots instance 0 from the boot ROM.
    pub fn first_stage_boot(&mut self) {
        let loader = self.loader.as_ref().expect("first stage loader installed");
        let boot = loader.from_rom(&self.boot_rom);
        self.boot_instance(0, boot, true);
    }

    /// Sets up a processor without the boot protocol: number, no processes.
    /// Used for harnesses that wire processes by hand.
    pub fn bare_processor(&mut self, instance: usize, number: u16) {
        let p = &mut self.procs[instance];
        p.booted = true;
        p.number = Some(number);
        self.numbers.insert(number, instance);
    }

    fn boot_instance(&mut self, instance: usize, boot: Box<dyn Behavior>, first: bool) {
        self.procs[instance].booted = true;
        self.stats.boots += 1;
        self.trace.record(self.step, Event::Boot { instance, first });
        self.install(instance, 0, 0, boot, StartOptions { privileged: true, exception_handler: None });
        self.progress = true;
    }

    /// Places a process on a core, replacing nothing. Returns false if occupied.
    pub fn start_process(&mut self, instance: usize, node: u8, core: u8, behavior: Box<dyn Behavior>, opts: StartOptions) -> bool {
        if self.procs[instance].nodes[node as usize].cores[core as usize].is_some() {
            return false;
        }
        self.install(instance, node, core, behavior, opts);
        true
    }

    pub(crate) fn install(&mut self, instance: usize, node: u8, core: u8, behavior: Box<dyn Behavior>, opts: StartOptions) {
        let slot = Slot::new(behavior, opts);
        if !opts.privileged {
            self.stats.user_starts += 1;
        }
        self.trace.record(
            self.step,
            Event::Start { instance, node, core, name: slot.name.clone(), privileged: opts.privileged },
        );
        self.procs[instance].nodes[node as usize].cores[core as usize] = Some(slot);
    }

    pub(crate) fn slot(&self, instance: usize, node: u8, core: u8) -> Option<&Slot> {
        self.procs[instance].nodes[node as usize].cores[core as usize].as_ref()
    }

    pub(crate) fn slot_mut(&mut self, instance: usize, node: u8, core: u8) -> Option<&mut Slot> {
        self.procs[instance].nodes[node as usize].cores[core as usize].as_mut()
    }

    pub(crate) fn port_id_of(&self, instance: usize, node: u8, core: u8, local: u16) -> PortId {
        let privileged = self.slot(instance, node, core).map(|s| s.opts.privileged).unwrap_or(false);
        let number = self.procs[instance].number.unwrap_or(LOCAL_PROCESSOR);
        PortId::raw(privileged, number, node, core, local)
    }

    pub(crate) fn link_connected(&self, instance: usize, link: u8) -> bool {
        self.peers[instance][link as usize].is_some()
            || self.external[instance][link as usize].as_ref().is_some_and(|e| e.connected())
    }

    pub(crate) fn push_link(&mut self, instance: usize, link: u8, item: LinkItem) {
        if self.link_connected(instance, link) {
            self.procs[instance].link_out[link as usize].push_back(item);
        } else if let LinkItem::Routed { dest, token, credited, .. } = item {
            self.drop_routed(instance, dest, token, credited);
        }
    }

    pub(crate) fn set_number(&mut self, instance: usize, number: u16) {
        let old = self.procs[instance].number.replace(number);
        if let Some(old) = old {
            self.numbers.remove(&old);
        }
        self.numbers.insert(number, instance);
        // connections opened under the old identity keep their ownership
        let old = old.unwrap_or(LOCAL_PROCESSOR);
        let renumber = |id: &mut PortId| {
            if id.processor() == old {
                *id = PortId::raw(id.privileged(), number, id.node(), id.core(), id.local_port());
            }
        };
        for node in &mut self.procs[instance].nodes {
            for slot in node.cores.iter_mut().flatten() {
                for ps in &mut slot.ports {
                    ps.owner.as_mut().map(renumber);
                    ps.staged.iter_mut().for_each(|(src, _)| renumber(src));
                }
            }
        }
    }

    pub(crate) fn set_route(&mut self, instance: usize, processor: u16, link: u8) {
        self.procs[instance].table.insert(processor, link);
        self.trace.record(self.step, Event::RouteSet { instance, processor, link });
    }

    fn route_step(&self, instance: usize, dest: PortId) -> Route {
        let p = &self.procs[instance];
        let target = dest.processor();
        if target == LOCAL_PROCESSOR || p.number == Some(target) {
            return Route::Local;
        }
        match p.table.get(&target) {
            Some(&l) => Route::Link(l),
            None => Route::Missing,
        }
    }

    fn resolve(&self, instance: usize, dest: PortId) -> Target {
        let target = dest.processor();
        let inst = if target == LOCAL_PROCESSOR {
            Some(instance)
        } else {
            self.numbers.get(&target).copied()
        };
        match inst {
            None => Target::Remote,
            Some(i) => match self.slot(i, dest.node(), dest.core()) {
                Some(s) if (dest.local_port() as usize) < s.ports.len() && s.stopping.is_none() => {
                    Target::Port { instance: i }
                }
                _ => Target::Void,
            },
        }
    }

    fn drop_routed(&mut self, instance: usize, dest: PortId, token: Token, credited: bool) {
        if credited {
            // release the reservation if the receiver still exists
            if let Target::Port { instance: i } = self.resolve(instance, dest) {
                if let Some(ps) = self.port_mut(i, dest) {
                    ps.in_flight = ps.in_flight.saturating_sub(1);
                }
            }
        }
        if !token.is_end() {
            self.stats.data_dropped += 1;
        }
        self.trace.record(self.step, Event::Dropped { instance, dest, token });
    }

    /// Whether `dest` has buffer space for one more token from `src`.
    pub(crate) fn has_credit(&self, instance: usize, src: PortId, dest: PortId) -> bool {
        match self.resolve(instance, dest) {
            Target::Port { instance: ti } => {
                let ps = &self.slot(ti, dest.node(), dest.core()).expect("resolved")
                    .ports[dest.local_port() as usize];
                ps.inbox.len() + ps.in_flight < self.cfg.buffer_capacity
                    && ps.owner.is_none_or(|o| o == src.address())
            }
            _ => true,
        }
    }

    fn port_mut(&mut self, instance: usize, dest: PortId) -> Option<&mut PortState> {
        self.slot_mut(instance, dest.node(), dest.core())?.ports.get_mut(dest.local_port() as usize)
    }

    fn deliver_local(&mut self, instance: usize, dest: PortId, src: PortId, token: Token, credited: bool) {
        self.progress = true;
        let Some(ps) = self.port_mut(instance, dest) else {
            if !token.is_end() {
                self.stats.data_dropped += 1;
            }
            self.trace.record(self.step, Event::Dropped { instance, dest, token });
            return;
        };
        let src = src.address();
        if credited {
            ps.in_flight = ps.in_flight.saturating_sub(1);
        } else {
            match ps.owner {
                None => ps.owner = Some(src),
                Some(o) if o == src => {}
                Some(_) => {
                    ps.staged.push_back((src, token));
                    return;
                }
            }
        }
        ps.inbox.push_back(token);
        let mut delivered = u64::from(!token.is_end());
        if token.is_end() && ps.owner == Some(src) {
            ps.owner = None;
            delivered += Self::promote_staged(ps);
        }
        self.stats.data_delivered += delivered;
        self.trace.record(self.step, Event::Deliver { instance, dest, token });
    }

    /// Moves staged tokens of the next sender into the inbox. Returns data tokens moved.
    fn promote_staged(ps: &mut PortState) -> u64 {
        let mut moved = 0;
        while ps.owner.is_none() {
            let Some(&(src, _)) = ps.staged.front() else { return moved };
            ps.owner = Some(src);
            let mut rest = VecDeque::new();
            for (s, t) in ps.staged.drain(..) {
                if s == src && ps.owner == Some(src) {
                    ps.inbox.push_back(t);
                    if t.is_end() {
                        ps.owner = None;
                    } else {
                        moved += 1;
                    }
                } else {
                    rest.push_back((s, t));
                }
            }
            ps.staged = rest;
        }
        moved
    }

    fn arrive(&mut self, instance: usize, link: u8, item: LinkItem) {
        self.progress = true;
        match item {
            LinkItem::Raw(token) => {
                if self.procs[instance].booted {
                    self.procs[instance].raw_in[link as usize].push_back(token);
                } else {
                    self.first_stage(instance, link, token);
                }
            }
            LinkItem::Routed { dest, src, token, credited } => match self.route_step(instance, dest) {
                Route::Local => self.deliver_local(instance, dest, src, token, credited),
                Route::Link(l) => self.push_link(instance, l, item),
                Route::Missing => self.drop_routed(instance, dest, token, credited),
            },
        }
    }

    /// The first stage loader of an unbooted processor: collects link frames
    /// and boots on the first complete boot image.
    fn first_stage(&mut self, instance: usize, link: u8, token: Token) {
        let frames = &mut self.procs[instance].loader_frames[link as usize];
        match token {
            Token::Data(w) => frames.push(w),
            Token::End => {
                let frame = std::mem::take(frames);
                let boot = self.loader.as_ref().and_then(|l| l.from_frame(&frame));
                if let Some(boot) = boot {
                    // partial frames on other links continue into the booted
                    // processor's link input, so they are seen whole
                    let p = &mut self.procs[instance];
                    for (frames, raw) in p.loader_frames.iter_mut().zip(p.raw_in.iter_mut()) {
                        raw.extend(frames.drain(..).map(Token::Data));
                    }
                    debug!("instance {instance} booted via link {link}");
                    self.boot_instance(instance, boot, false);
                }
            }
        }
    }

    fn move_links(&mut self) {
        let mut arrivals = Vec::new();
        for i in 0..self.procs.len() {
            for k in 0..LINKS_PER_PROCESSOR {
                if let Some((j, jk)) = self.peers[i][k] {
                    if let Some(item) = self.procs[i].link_out[k].pop_front() {
                        arrivals.push((j, jk, item));
                    }
                } else if let Some(ext) = self.external[i][k].as_mut() {
                    if let Some(item) = self.procs[i].link_out[k].pop_front() {
                        ext.send(item);
                        self.progress = true;
                    }
                    if let Some(item) = ext.poll() {
                        let item = match item {
                            LinkItem::Routed { dest, src, token, .. } => {
                                LinkItem::Routed { dest, src, token, credited: false }
                            }
                            raw => raw,
                        };
                        arrivals.push((i, k as u8, item));
                    }
                }
            }
        }
        for (i, k, item) in arrivals {
            self.arrive(i, k, item);
        }
    }

    fn deliver_exceptions(&mut self) {
        let mut waiting = VecDeque::new();
        while let Some((instance, handler, msg)) = self.pending_exceptions.pop_front() {
            match self.port_mut(instance, handler) {
                None => {
                    warn!("exception for {handler:?} has no handler; discarded");
                    self.progress = true;
                }
                Some(ps) if ps.owner.is_none() => {
                    ps.inbox.extend(msg.iter().map(|&w| Token::Data(w)));
                    ps.inbox.push_back(Token::End);
                    self.progress = true;
                }
                Some(_) => waiting.push_back((instance, handler, msg)),
            }
        }
        self.pending_exceptions = waiting;
    }

    fn admit(&mut self, instance: usize, node: u8, core: u8) {
        loop {
            let Some(slot) = self.slot(instance, node, core) else { return };
            let Some(&out) = slot.outq.front() else { return };
            let src = self.port_id_of(instance, node, core, out.src);
            let src_privileged = slot.opts.privileged;
            let target = self.resolve(instance, out.dest);
            let admitted = match (out.token, target) {
                (None, Target::Port { instance: ti }) => {
                    let dest = out.dest;
                    let ps = self.port_mut(ti, dest).expect("resolved port");
                    if ps.privileged_only && !src_privileged {
                        self.fault(instance, node, core, Reason::Privilege, &format!("connect to {dest:?}"));
                        return;
                    }
                    match ps.owner {
                        None => {
                            ps.owner = Some(src.address());
                            self.trace.record(self.step, Event::Connect { src, dest });
                            true
                        }
                        Some(o) => o == src.address(),
                    }
                }
                (None, _) => true,
                (Some(token), Target::Port { instance: ti }) => {
                    let cap = self.cfg.buffer_capacity;
                    let ps = self.port_mut(ti, out.dest).expect("resolved port");
                    if ps.inbox.len() + ps.in_flight < cap {
                        ps.in_flight += 1;
                        self.inject(instance, out.dest, src, token, true);
                        true
                    } else {
                        false
                    }
                }
                (Some(token), Target::Void) => {
                    if !token.is_end() {
                        self.stats.data_admitted += 1;
                    }
                    self.drop_routed(instance, out.dest, token, false);
                    true
                }
                (Some(token), Target::Remote) => {
                    self.inject(instance, out.dest, src, token, false);
                    true
                }
            };
            if !admitted {
                return;
            }
            self.progress = true;
            if let Some(slot) = self.slot_mut(instance, node, core) {
                slot.outq.pop_front();
            }
        }
    }

    /// Puts a token into the network at `instance`'s switch.
    fn inject(&mut self, instance: usize, dest: PortId, src: PortId, token: Token, credited: bool) {
        if !token.is_end() {
            self.stats.data_admitted += 1;
        }
        match self.route_step(instance, dest) {
            Route::Local => self.deliver_local(instance, dest, src, token, credited),
            Route::Link(l) => self.push_link(instance, l, LinkItem::Routed { dest, src, token, credited }),
            Route::Missing => self.drop_routed(instance, dest, token, credited),
        }
    }

    pub(crate) fn fault(&mut self, instance: usize, node: u8, core: u8, reason: Reason, detail: &str) {
        if let Some(slot) = self.slot_mut(instance, node, core) {
            warn!("process {} on instance {instance} node {node} core {core} faulted: {reason:?}: {detail}", slot.name);
            slot.outq.clear();
            slot.stopping = Some(reason);
        }
    }

    /// Removes a process; closes its open connections and raises its
    /// termination exception.
    pub(crate) fn retire(&mut self, instance: usize, node: u8, core: u8) {
        let Some(slot) = self.procs[instance].nodes[node as usize].cores[core as usize].take() else { return };
        let reason = slot.stopping.unwrap_or(Reason::Killed);
        let number = self.procs[instance].number.unwrap_or(LOCAL_PROCESSOR);
        for (i, ps) in slot.ports.iter().enumerate() {
            if let (true, Some(dest)) = (ps.open, ps.bound) {
                let src = PortId::raw(slot.opts.privileged, number, node, core, i as u16);
                let owned = match self.resolve(instance, dest) {
                    Target::Port { instance: ti } => {
                        self.port_mut(ti, dest).is_some_and(|p| p.owner == Some(src.address()))
                    }
                    Target::Void => false,
                    Target::Remote => true,
                };
                if owned {
                    self.inject(instance, dest, src, Token::End, false);
                }
            }
        }
        self.trace.record(self.step, Event::Stop { instance, node, core, reason: reason.word() });
        if let Some(handler) = slot.opts.exception_handler {
            self.stats.exceptions += 1;
            self.trace.record(self.step, Event::Exception { instance, node, core, reason: reason.word() });
            self.pending_exceptions.push_back((instance, handler, [core as Word, reason.word()]));
        }
        self.progress = true;
    }

    fn step_core(&mut self, instance: usize, node: u8, core: u8) {
        let ready = match self.slot(instance, node, core) {
            Some(s) => s.outq.is_empty() && s.stopping.is_none() && s.behavior.is_some(),
            None => false,
        };
        if !ready {
            return;
        }
        let mut behavior = self.slot_mut(instance, node, core).and_then(|s| s.behavior.take()).expect("behavior");
        let (result, progressed, replacement) = {
            let mut cx = Cx::new(self, instance, node, core);
            let r = behavior.step(&mut cx);
            let (p, rep) = cx.finish();
            (r, p, rep)
        };
        let Some(slot) = self.slot_mut(instance, node, core) else { return };
        slot.behavior = Some(behavior);
        let worked = match result {
            Ok(Step::Idle) => progressed,
            Ok(Step::Busy) => true,
            Ok(Step::Stop) => {
                slot.stopping = Some(Reason::Stopped);
                true
            }
            Err(f) => {
                let detail = f.detail.clone();
                self.fault(instance, node, core, f.reason, &detail);
                true
            }
        };
        if worked {
            let n = &mut self.procs[instance].nodes[node as usize];
            n.cycles = n.cycles.wrapping_add(1);
            self.progress = true;
        }
        if let Some((b, opts)) = replacement {
            // exec: the process is replaced in place without an exception
            if let Some(s) = self.slot_mut(instance, node, core) {
                s.opts.exception_handler = None;
                s.stopping = Some(Reason::Stopped);
            }
            self.retire(instance, node, core);
            self.install(instance, node, core, b, opts);
        }
    }

    /// Executes exactly one engine step.
    pub fn advance(&mut self) -> StepReport {
        self.progress = false;
        self.move_links();
        self.deliver_exceptions();
        let n = self.procs.len();
        for i in 0..n {
            for node in 0..NODES_PER_PROCESSOR as u8 {
                for core in 0..CORES_PER_NODE as u8 {
                    self.admit(i, node, core);
                }
            }
        }
        for i in 0..n {
            for node in 0..NODES_PER_PROCESSOR as u8 {
                for core in 0..CORES_PER_NODE as u8 {
                    self.step_core(i, node, core);
                }
            }
        }
        for i in 0..n {
            for node in 0..NODES_PER_PROCESSOR as u8 {
                for core in 0..CORES_PER_NODE as u8 {
                    let done = self.slot(i, node, core).is_some_and(|s| s.stopping.is_some() && s.outq.is_empty());
                    if done {
                        self.retire(i, node, core);
                    }
                }
            }
        }
        for p in &mut self.procs {
            for node in &mut p.nodes {
                node.ticks = node.ticks.wrapping_add(1);
            }
        }
        self.step += 1;
        StepReport { progress: self.progress }
    }

    /// Advances until `done` holds or `max_steps` steps have run. Returns true if `done` held.
    pub fn run_until(&mut self, max_steps: u64, mut done: impl FnMut(&Engine) -> bool) -> bool {
        for _ in 0..max_steps {
            if done(self) {
                return true;
            }
            self.advance();
        }
        done(self)
    }

    /// Advances until a step makes no progress. Returns the number of steps run,
    /// or `None` if `max_steps` ran out first.
    pub fn run_to_quiescence(&mut self, max_steps: u64) -> Option<u64> {
        for n in 0..max_steps {
            if !self.advance().progress {
                return Some(n + 1);
            }
        }
        None
    }

    // ---- inspection ----

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn instances(&self) -> usize {
        self.procs.len()
    }

    pub fn number(&self, instance: usize) -> Option<u16> {
        self.procs[instance].number
    }

    pub fn instance_of(&self, number: u16) -> Option<usize> {
        self.numbers.get(&number).copied()
    }

    pub fn booted(&self, instance: usize) -> bool {
        self.procs[instance].booted
    }

    pub fn table(&self, instance: usize) -> &BTreeMap<u16, u8> {
        &self.procs[instance].table
    }

    pub fn peer(&self, instance: usize, link: u8) -> Option<(usize, u8)> {
        self.peers[instance][link as usize]
    }

    /// Node tick counter and executed-step counter.
    pub fn clock(&self, instance: usize, node: u8) -> (u32, u32) {
        let n = &self.procs[instance].nodes[node as usize];
        (n.ticks, n.cycles)
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn counter(&self, key: &str) -> i64 {
        self.counters.get(key).copied().unwrap_or(0)
    }

    pub fn trace_hash(&self) -> u64 {
        self.trace.hash()
    }

    pub fn trace_events(&self) -> u64 {
        self.trace.events()
    }

    pub fn take_trace_lines(&mut self) -> Vec<String> {
        self.trace.take_lines()
    }

    pub fn processes(&self) -> Vec<ProcessInfo> {
        let mut v = Vec::new();
        for (i, p) in self.procs.iter().enumerate() {
            for (n, node) in p.nodes.iter().enumerate() {
                for (c, slot) in node.cores.iter().enumerate() {
                    if let Some(s) = slot {
                        v.push(ProcessInfo { instance: i, node: n as u8, core: c as u8, name: s.name.clone(), privileged: s.opts.privileged });
                    }
                }
            }
        }
        v
    }

    pub fn process_name(&self, instance: usize, node: u8, core: u8) -> Option<&str> {
        self.slot(instance, node, core).map(|s| s.name.as_str())
    }

    /// Read-only view of a process's behavior state, for tests and tooling.
    pub fn behavior<T: 'static>(&self, instance: usize, node: u8, core: u8) -> Option<&T> {
        self.slot(instance, node, core)?.behavior.as_ref()?.as_any().downcast_ref::<T>()
    }

    /// Tokens currently inside the network (link queues and staged).
    pub fn tokens_in_network(&self) -> usize {
        self.procs
            .iter()
            .map(|p| p.link_out.iter().map(VecDeque::len).sum::<usize>())
            .sum()
    }

    /// Buffered process output not yet admitted.
    pub fn pending_output(&self) -> usize {
        self.procs
            .iter()
            .flat_map(|p| p.nodes.iter())
            .flat_map(|n| n.cores.iter().flatten())
            .map(|s| s.outq.len())
            .sum()
    }

    /// Data tokens sitting in inboxes.
    pub fn inbox_tokens(&self) -> usize {
        self.procs
            .iter()
            .flat_map(|p| p.nodes.iter())
            .flat_map(|n| n.cores.iter().flatten())
            .flat_map(|s| s.ports.iter())
            .map(|ps| ps.inbox.iter().filter(|t| !t.is_end()).count() + ps.staged.iter().filter(|(_, t)| !t.is_end()).count())
            .sum()
    }

    pub fn inbox_len(&self, port: PortId, instance: usize) -> usize {
        self.slot(instance, port.node(), port.core())
            .and_then(|s| s.ports.get(port.local_port() as usize))
            .map_or(0, |ps| ps.inbox.len())
    }
}
