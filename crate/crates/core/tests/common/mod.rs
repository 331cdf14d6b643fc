//! Shared test fixtures: a bench for running one tool in isolation, and
//! topology helpers with breadth-first-search oracles.

#![allow(dead_code)]

pub mod files;
pub mod network;
pub mod session;
pub mod tools;

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use nopsys::fabric::{Cx, Engine, EngineConfig, LinkSpec, PortId, StartOptions, Token, Topology, Word, LINKS_PER_PROCESSOR};
use nopsys::runtime::negotiate::{Invoker, Negotiation};
use nopsys::runtime::{Behavior, Fault, Registry, Step, StepResult};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROCESSOR: u16 = 8;
const TOOL_NODE: u8 = 1;
const SOURCE_NODE: u8 = 2;
const SINK_NODE: u8 = 3;

fn port(node: u8, core: u8, local: u16) -> PortId {
    PortId::new(false, PROCESSOR, node, core, local).unwrap()
}

/// Streams words into one tool input, one token every `pace` steps.
struct Source {
    words: Vec<Word>,
    pace: u32,
    connected: bool,
    pos: usize,
    wait: u32,
}

impl Behavior for Source {
    fn name(&self) -> &str {
        "source"
    }
    fn port_count(&self) -> u16 {
        2
    }
    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        if !self.connected {
            return Ok(match cx.recv(0) {
                Some(Token::Data(w)) => {
                    self.connected = true;
                    cx.connect(1, PortId::from_word(w))?;
                    Step::Busy
                }
                _ => Step::Idle,
            });
        }
        if self.wait > 0 {
            self.wait -= 1;
            return Ok(Step::Busy);
        }
        self.wait = self.pace;
        match self.words.get(self.pos) {
            Some(&w) => {
                cx.send_word(1, w)?;
                self.pos += 1;
                Ok(Step::Busy)
            }
            None => {
                cx.end(1)?;
                Ok(Step::Stop)
            }
        }
    }
}

/// Collects one tool output, reading one token every `pace` steps.
pub struct Sink {
    pub words: Vec<Word>,
    pub ended: bool,
    pace: u32,
    wait: u32,
}

impl Behavior for Sink {
    fn name(&self) -> &str {
        "sink"
    }
    fn port_count(&self) -> u16 {
        1
    }
    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        if self.ended {
            return Ok(Step::Idle);
        }
        if self.wait > 0 {
            self.wait -= 1;
            return Ok(Step::Busy);
        }
        match cx.recv(0) {
            Some(Token::Data(w)) => {
                self.wait = self.pace;
                self.words.push(w);
                Ok(Step::Busy)
            }
            Some(Token::End) => {
                self.ended = true;
                Ok(Step::Busy)
            }
            None => Ok(Step::Idle),
        }
    }
}

/// Negotiates with the tool, then tells every source where to send.
struct Driver {
    invoker: Invoker,
    started: bool,
    outputs: usize,
    sources: usize,
    given: usize,
    pending: VecDeque<(usize, PortId)>,
    pub inputs: Option<Vec<PortId>>,
    failed: Option<&'static str>,
}

impl Behavior for Driver {
    fn name(&self) -> &str {
        "driver"
    }
    fn port_count(&self) -> u16 {
        3
    }
    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        if !self.started {
            self.started = true;
            let ctrl = port(TOOL_NODE, 0, 0);
            let never = || -> PortId { unreachable!() };
            self.invoker.feed(cx, Token::Data(ctrl.word()), never)?;
            self.invoker.feed(cx, Token::End, never)?;
            return Ok(Step::Busy);
        }
        if let Some((j, dest)) = self.pending.pop_front() {
            cx.message(2, port(SOURCE_NODE, j as u8, 0), &[dest.word()])?;
            return Ok(Step::Busy);
        }
        if self.inputs.is_some() || self.failed.is_some() {
            return Ok(Step::Idle);
        }
        let Some(t) = cx.recv(1) else { return Ok(Step::Idle) };
        let outputs = self.outputs;
        let given = &mut self.given;
        let mut next_sink = || {
            let k = *given;
            *given += 1;
            assert!(k < outputs, "tool asked for more outputs than expected");
            port(SINK_NODE, k as u8, 0)
        };
        match self.invoker.feed(cx, t, &mut next_sink).map_err(|e| Fault::protocol(e.to_string()))? {
            Negotiation::Pending => {}
            Negotiation::Done(inputs) => {
                assert_eq!(inputs.len(), self.sources, "announced inputs");
                self.pending = inputs.iter().copied().enumerate().collect();
                self.inputs = Some(inputs);
            }
            Negotiation::Failed(why) => self.failed = Some(why),
        }
        Ok(Step::Busy)
    }
}

/// One input stream and the pace of its source.
#[derive(Debug, Clone)]
pub struct Feed {
    pub words: Vec<Word>,
    pub pace: u32,
}

impl Feed {
    pub fn new(words: Vec<Word>) -> Self {
        Feed { words, pace: 0 }
    }
}

pub struct BenchRun {
    pub outputs: Vec<Vec<Word>>,
    pub steps: u64,
    pub engine: Engine,
}

/// Runs a tool with the given input streams (in announcement order) and
/// `outputs` sinks read every `sink_pace` steps. Panics unless every
/// output ends and the tool stops.
pub fn bench(tool: Box<dyn Behavior>, feeds: &[Feed], outputs: usize, sink_pace: u32) -> BenchRun {
    let mut e = Engine::new(&Topology::single(), EngineConfig::default(), Arc::new(Registry::new()));
    e.bare_processor(0, PROCESSOR);
    let opts = StartOptions::default();
    let driver = Driver {
        invoker: Invoker::new(0, 1),
        started: false,
        outputs,
        sources: feeds.len(),
        given: 0,
        pending: VecDeque::new(),
        inputs: None,
        failed: None,
    };
    assert!(e.start_process(0, 0, 0, Box::new(driver), opts));
    assert!(e.start_process(0, TOOL_NODE, 0, tool, opts));
    for (j, f) in feeds.iter().enumerate() {
        let s = Source { words: f.words.clone(), pace: f.pace, connected: false, pos: 0, wait: 0 };
        assert!(e.start_process(0, SOURCE_NODE, j as u8, Box::new(s), opts));
    }
    for k in 0..outputs {
        let s = Sink { words: Vec::new(), ended: false, pace: sink_pace, wait: 0 };
        assert!(e.start_process(0, SINK_NODE, k as u8, Box::new(s), opts));
    }
    let steps = e.run_to_quiescence(10_000_000).expect("bench settles");
    assert!(e.process_name(0, TOOL_NODE, 0).is_none(), "tool did not stop");
    let outputs = (0..outputs)
        .map(|k| {
            let s = e.behavior::<Sink>(0, SINK_NODE, k as u8).unwrap();
            assert!(s.ended, "output {k} not closed");
            s.words.clone()
        })
        .collect();
    BenchRun { outputs, steps, engine: e }
}

/// Hop distances between all reachable instance pairs, by breadth-first search.
pub fn bfs_distances(t: &Topology) -> Vec<BTreeMap<usize, u32>> {
    let peers = t.peers();
    (0..t.processors())
        .map(|src| {
            let mut dist = BTreeMap::from([(src, 0)]);
            let mut queue = VecDeque::from([src]);
            while let Some(p) = queue.pop_front() {
                let d = dist[&p];
                for (q, _) in peers[p].iter().flatten() {
                    if !dist.contains_key(q) {
                        dist.insert(*q, d + 1);
                        queue.push_back(*q);
                    }
                }
            }
            dist
        })
        .collect()
}

/// A random connected topology: a random spanning tree plus extra links,
/// never more than four links per processor.
pub fn random_topology(rng: &mut ChaCha8Rng, processors: usize) -> Topology {
    let mut free: Vec<Vec<u8>> = (0..processors)
        .map(|_| {
            let mut l: Vec<u8> = (0..LINKS_PER_PROCESSOR as u8).collect();
            l.shuffle(rng);
            l
        })
        .collect();
    let mut links = Vec::new();
    let mut order: Vec<usize> = (1..processors).collect();
    order.shuffle(rng);
    let mut placed = vec![0usize];
    for p in order {
        // attach to a placed processor with a free link; one always exists
        // since a tree of n nodes with degree ≤ 4 has spare links
        let candidates: Vec<usize> = placed.iter().copied().filter(|&q| !free[q].is_empty()).collect();
        let q = *candidates.choose(rng).expect("free link in tree");
        let (a_link, b_link) = (free[q].pop().unwrap(), free[p].pop().unwrap());
        links.push(LinkSpec { a: q, a_link, b: p, b_link });
        placed.push(p);
    }
    let extra = rng.gen_range(0..=processors);
    for _ in 0..extra {
        let a = rng.gen_range(0..processors);
        let b = rng.gen_range(0..processors);
        if a == b || free[a].is_empty() || free[b].is_empty() {
            continue;
        }
        let a_link = free[a].pop().unwrap();
        let b_link = free[b].pop().unwrap();
        links.push(LinkSpec { a, a_link, b, b_link });
    }
    Topology::new(processors, links).expect("valid random topology")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
