//! Booting whole networks and checking the result against independent oracles.

use std::collections::BTreeSet;
use std::sync::Arc;

use nopsys::bootsys::{default_rom, BootLoader, Enumerator, DEFAULT_INIT, ENUMERATOR_CORE};
use nopsys::fabric::port::FIRST_PROCESSOR;
use nopsys::fabric::{Cx, Engine, EngineConfig, PortId, StartOptions, Topology, LINKS_PER_PROCESSOR};
use nopsys::kernel::ports::{CONSOLE_CORE, DISPATCHER_CORE, FILESERVER_CORE, LOADER_CORE, SCHEDULER_CORE};
use nopsys::runtime::{Assembler, Behavior, Registry, Step, StepResult};

use super::bfs_distances;

pub const LIMIT: u64 = 2_000_000;

pub fn engine(topology: &Topology) -> Engine {
    let mut e = Engine::new(topology, EngineConfig::default(), Arc::new(Registry::new()));
    e.set_first_stage_loader(Box::new(BootLoader));
    e.set_boot_rom(default_rom(DEFAULT_INIT));
    e.first_stage_boot();
    e
}

/// Boots to the point where enumeration and flooding are complete and
/// returns the enumerator's flood records.
pub fn boot_until_enumerated(e: &mut Engine) -> Vec<nopsys::bootsys::FloodRecord> {
    let finished = e.run_until(LIMIT, |e| {
        e.behavior::<Enumerator>(0, 0, ENUMERATOR_CORE).is_some_and(Enumerator::finished)
    });
    assert!(finished, "enumeration did not finish");
    e.behavior::<Enumerator>(0, 0, ENUMERATOR_CORE).unwrap().floods.clone()
}

pub fn check_routes(t: &Topology, e: &Engine) {
    let dist = bfs_distances(t);
    let peers = t.peers();
    let reachable = t.reachable_from_first();
    for &a in &reachable {
        let table = e.table(a);
        for &b in &reachable {
            if a == b {
                continue;
            }
            let nb = e.number(b).unwrap();
            let link = *table.get(&nb).unwrap_or_else(|| panic!("{a} has no route to {nb}"));
            let (next, _) = peers[a][link as usize].expect("route uses a connected link");
            assert_eq!(dist[next][&b] + 1, dist[a][&b], "route {a}->{b} via link {link} is not shortest");
        }
    }
}

pub fn check_numbering(t: &Topology, e: &Engine) {
    let reachable = t.reachable_from_first();
    let numbers: BTreeSet<u16> = reachable.iter().map(|&i| e.number(i).expect("numbered")).collect();
    let expected: BTreeSet<u16> = (FIRST_PROCESSOR..FIRST_PROCESSOR + reachable.len() as u16).collect();
    assert_eq!(numbers, expected);
    assert_eq!(e.number(0), Some(FIRST_PROCESSOR));
    for i in 0..t.processors() {
        if !reachable.contains(&i) {
            assert_eq!(e.number(i), None);
            assert!(!e.booted(i));
        }
    }
}

pub fn check_routine(t: &Topology, e: &Engine) {
    let reachable = t.reachable_from_first();
    assert_eq!(e.process_name(0, 0, CONSOLE_CORE), Some("console"));
    assert_eq!(e.process_name(0, 0, DISPATCHER_CORE), Some("dispatch"));
    assert_eq!(e.process_name(0, 0, LOADER_CORE), Some("loader"));
    assert_eq!(e.process_name(0, 0, FILESERVER_CORE), Some("files"));
    for &i in &reachable {
        let nodes = if i == 0 { 1..4 } else { 0..4 };
        for n in nodes {
            assert_eq!(e.process_name(i, n, SCHEDULER_CORE), Some("schedule"), "instance {i} node {n}");
        }
        for link in 0..LINKS_PER_PROCESSOR as u8 {
            assert_eq!(e.process_name(i, 0, 3 + link), if i == 0 && link == 0 { Some("loader") } else if i == 0 && link == 1 { Some("files") } else { None });
        }
    }
}

pub fn full_boot(t: &Topology) -> Engine {
    let mut e = engine(t);
    let floods = boot_until_enumerated(&mut e);
    let reachable = t.reachable_from_first().len();
    assert_eq!(floods.len(), reachable);
    for f in &floods {
        assert_eq!(f.credits, f.debits, "flood from {} unbalanced", f.origin);
    }
    assert!(e.run_to_quiescence(LIMIT).is_some(), "boot did not settle");
    check_numbering(t, &e);
    check_routes(t, &e);
    check_routine(t, &e);
    assert_eq!(e.counter("balance_negative"), 0);
    e
}

/// Answers every message `[reply]` with `[own number]`.
#[derive(Default)]
pub struct Echo {
    reader: Assembler,
    pub served: usize,
}

impl Behavior for Echo {
    fn name(&self) -> &str {
        "echo"
    }
    fn port_count(&self) -> u16 {
        2
    }
    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        let Some(t) = cx.recv(0) else { return Ok(Step::Idle) };
        if let Some(msg) = self.reader.feed(t) {
            let number = cx.own_processor().unwrap_or(0) as u32;
            cx.message(1, PortId::from_word(msg[0]), &[number])?;
            self.served += 1;
        }
        Ok(Step::Busy)
    }
}

/// Sends one request to the echo and keeps its answer.
#[derive(Default)]
pub struct Ping {
    sent: bool,
    reader: Assembler,
    pub answer: Option<Vec<u32>>,
}

impl Behavior for Ping {
    fn name(&self) -> &str {
        "ping"
    }
    fn port_count(&self) -> u16 {
        2
    }
    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        if !self.sent {
            self.sent = true;
            let echo = PortId::new(false, FIRST_PROCESSOR, 1, 7, 0).unwrap();
            cx.message(1, echo, &[cx.port_id(0).word()])?;
            return Ok(Step::Busy);
        }
        let Some(t) = cx.recv(0) else { return Ok(Step::Idle) };
        if let Some(msg) = self.reader.feed(t) {
            self.answer = Some(msg);
        }
        Ok(Step::Busy)
    }
}

/// Every reachable processor exchanges a message with the first one.
pub fn check_exchange(t: &Topology, e: &mut Engine) {
    let reachable = t.reachable_from_first();
    let opts = StartOptions::default();
    assert!(e.start_process(0, 1, 7, Box::<Echo>::default(), opts));
    for &i in &reachable {
        assert!(e.start_process(i, 2, 7, Box::<Ping>::default(), opts));
    }
    assert!(e.run_to_quiescence(LIMIT).is_some());
    for &i in &reachable {
        let p = e.behavior::<Ping>(i, 2, 7).unwrap();
        assert_eq!(p.answer.as_deref(), Some(&[FIRST_PROCESSOR as u32][..]), "instance {i}");
    }
    assert_eq!(e.behavior::<Echo>(0, 1, 7).unwrap().served, reachable.len());
}

