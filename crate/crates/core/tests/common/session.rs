//! Whole-system sessions and a reference model of what the shell should print.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use nopsys::fabric::{text_words, words_text, EngineConfig, MemoryFiles, Word};
use nopsys::kernel::ports::SCHEDULER_CORE;
use nopsys::kernel::Scheduler;
use nopsys::runtime::{Region, USER_BASE, USER_WORDS};
use nopsys::system::{System, SystemConfig};
use nopsys::userland::text::{parafill, upper};
use nopsys::userland::wiring::{replay, Endpoint};
use proptest::prelude::*;

pub const FOX: &str = "The quick brown fox jumps over the lazy dog.";
pub const PIPELINE: &str = r#"upper fwrite "doc.text" dup parafill:20 concat hello fread "fox.text""#;
pub const HELLO: &str = "Hello World\n";

pub fn system(trace: bool) -> System {
    let mut files = MemoryFiles::new();
    files.insert_text("fox.text", FOX);
    let cfg = SystemConfig { engine: EngineConfig { trace, ..EngineConfig::default() }, ..SystemConfig::default() };
    System::new(&cfg, files)
}

/// Console text with the prompts removed.
pub fn unprompted(out: &str) -> String {
    out.lines().map(|l| l.trim_start_matches("> ")).filter(|l| !l.is_empty()).map(|l| format!("{l}\n")).collect()
}

/// Every node other than the first processor's node 0 is back to an idle
/// scheduler, and every spawn was matched by a termination.
pub fn check_idle(s: &System) {
    let e = s.engine();
    let (mut spawned, mut terminated) = (0, 0);
    for i in 0..e.instances() {
        for node in 0..4u8 {
            let Some(sched) = e.behavior::<Scheduler>(i, node, SCHEDULER_CORE) else {
                assert!(i == 0 && node == 0, "no scheduler at instance {i} node {node}");
                continue;
            };
            assert_eq!(sched.resources.cores_free(), 7, "cores free at instance {i} node {node}");
            assert_eq!(sched.resources.ledger().free_regions(), &[Region::new(USER_BASE, USER_WORDS)], "free list at instance {i} node {node}");
            assert_eq!(sched.spawned, sched.terminated, "instance {i} node {node}");
            spawned += sched.spawned;
            terminated += sched.terminated;
        }
    }
    assert_eq!(spawned, terminated);
    assert_eq!(e.counter("user_spawns"), e.counter("user_exits"));
    assert_eq!(e.counter("user_spawns") as u64, spawned);
}

/// Inputs and outputs of the tools used by the random lines.
pub fn signature(name: &str, _dimension: Word) -> Option<(usize, usize)> {
    Some(match name {
        "upper" | "parafill" | "buf" => (1, 1),
        "concat" => (1, 2),
        "dup" => (2, 1),
        "hello" | "nil" => (1, 0),
        "absorb" => (0, 1),
        _ => return None,
    })
}

pub fn apply(name: &str, dimension: Word, inputs: &[String]) -> Vec<String> {
    let w = |s: &String| text_words(s);
    match name {
        "upper" => vec![words_text(&upper(&w(&inputs[0])))],
        "parafill" => vec![words_text(&parafill(dimension.max(1) as usize, &w(&inputs[0])))],
        "buf" => vec![inputs[0].clone()],
        "concat" => vec![format!("{}{}", inputs[1], inputs[0])],
        "dup" => vec![inputs[0].clone(), inputs[0].clone()],
        "hello" => vec![HELLO.to_string()],
        "nil" => vec![String::new()],
        "absorb" => vec![],
        _ => unreachable!(),
    }
}

pub struct Expected {
    /// Non-empty streams reaching the console.
    pub console: Vec<String>,
    /// Two streams from a common command meet again, at one command or at
    /// the console. With bounded buffers and console output atomic per
    /// message, that command can block on one output while the meeting
    /// point waits for the other.
    pub hazard: bool,
}

/// What the oracle expects on the console from one line followed by end of input.
pub fn expected(line: &str) -> Option<Expected> {
    let r = replay(line, signature);
    if r.open_string {
        return None;
    }
    type Stream = (String, BTreeSet<usize>);
    let mut streams: BTreeMap<Endpoint, Stream> = BTreeMap::new();
    let mut console: Vec<Stream> = Vec::new();
    let overlap = |v: &[&Stream]| v.iter().enumerate().any(|(i, a)| v[i + 1..].iter().any(|b| !a.1.is_disjoint(&b.1)));
    let mut hazard = false;
    let mut deliver = |at: Endpoint, stream: Stream, streams: &mut BTreeMap<Endpoint, Stream>| match at {
        Endpoint::Console => console.push(stream),
        e => assert!(streams.insert(e, stream).is_none(), "{e:?} fed twice"),
    };
    for (text, at) in &r.strings {
        deliver(*at, (text.clone(), BTreeSet::new()), &mut streams);
    }
    for at in r.closed.iter().chain(&r.console_line) {
        deliver(*at, Default::default(), &mut streams);
    }
    for (k, cmd) in r.commands.iter().enumerate().rev() {
        let (_, n_in) = signature(&cmd.name, cmd.dimension).unwrap();
        let inputs: Vec<Stream> = (0..n_in).map(|index| streams.remove(&Endpoint::Input { command: k, index }).expect("every input fed")).collect();
        hazard |= overlap(&inputs.iter().collect::<Vec<_>>());
        let mut origin: BTreeSet<usize> = inputs.iter().flat_map(|i| i.1.iter().copied()).collect();
        origin.insert(k);
        let texts: Vec<String> = inputs.into_iter().map(|i| i.0).collect();
        for (text, at) in apply(&cmd.name, cmd.dimension, &texts).into_iter().zip(&cmd.outputs) {
            deliver(*at, (text, origin.clone()), &mut streams);
        }
    }
    assert!(streams.is_empty());
    if r.fault {
        console.push(("fault\n".to_string(), BTreeSet::new()));
    }
    console.retain(|s| !s.0.is_empty());
    hazard |= overlap(&console.iter().collect::<Vec<_>>());
    Some(Expected { console: console.into_iter().map(|s| s.0).collect(), hazard })
}

/// Appends empty strings until the line leaves nothing waiting for the
/// next console line.
pub fn self_contained(mut line: String) -> String {
    while replay(&line, signature).console_line.is_some() {
        line.push_str(" \"\"");
    }
    line
}

/// True if `out` is an interleaving of `streams`.
pub fn interleaves(out: &[u8], streams: &[&[u8]]) -> bool {
    fn go(out: &[u8], streams: &[&[u8]], pos: &mut Vec<usize>, seen: &mut HashSet<Vec<usize>>) -> bool {
        let done: usize = pos.iter().sum();
        if done == out.len() {
            return pos.iter().zip(streams).all(|(p, s)| *p == s.len());
        }
        if !seen.insert(pos.clone()) {
            return false;
        }
        for i in 0..streams.len() {
            if streams[i].get(pos[i]) == Some(&out[done]) {
                pos[i] += 1;
                let ok = go(out, streams, pos, seen);
                pos[i] -= 1;
                if ok {
                    return true;
                }
            }
        }
        false
    }
    go(out, streams, &mut vec![0; streams.len()], &mut HashSet::new())
}

pub fn token() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => Just("upper".to_string()),
        2 => Just("concat".to_string()),
        2 => Just("dup".to_string()),
        3 => Just("hello".to_string()),
        1 => Just("nil".to_string()),
        1 => Just("absorb".to_string()),
        1 => (1u32..30).prop_map(|n| format!("parafill:{n}")),
        1 => (0u32..5).prop_map(|n| format!("buf:{n}")),
        3 => "[a-z ]{0,12}".prop_map(|s| format!("\"{s}\"")),
    ]
}

