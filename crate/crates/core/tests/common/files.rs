//! A file server client that writes a file and reads it back.

use std::sync::Arc;

use nopsys::fabric::{text_words, Cx, Engine, EngineConfig, MemoryFiles, StartOptions, Topology, Word};
use nopsys::kernel::fileserver::{OP_READ, OP_WRITE};
use nopsys::kernel::ports::{self, FILESERVER_CORE};
use nopsys::kernel::FileServer;
use nopsys::runtime::{Assembler, Behavior, Fault, Registry, Step, StepResult};

const REPLY: u16 = 0;
const SEND: u16 = 1;

#[derive(Debug, PartialEq)]
enum Phase {
    Open,
    Writing,
    Committing,
    OpenRead,
    Reading,
    Done,
}

/// Writes a file in chunks of `chunk` words, then reads it back.
struct Client {
    name: Vec<Word>,
    data: Vec<Word>,
    chunk: usize,
    sent: usize,
    phase: Phase,
    replies: Assembler,
    started: bool,
    write_ok: bool,
    read: Vec<Word>,
    chunks: usize,
}

impl Client {
    fn new(name: &str, data: Vec<Word>, chunk: usize) -> Self {
        Client {
            name: text_words(name),
            data,
            chunk,
            sent: 0,
            phase: Phase::Open,
            replies: Assembler::default(),
            started: false,
            write_ok: false,
            read: Vec::new(),
            chunks: 0,
        }
    }

    fn request(&self, cx: &mut Cx<'_>, op: Word) -> Result<(), Fault> {
        let mut req = vec![cx.port_id(REPLY).word(), op];
        req.extend_from_slice(&self.name);
        cx.message(SEND, ports::fileserver_request(), &req)
    }

    fn data(&self, cx: &mut Cx<'_>, words: &[Word]) -> Result<(), Fault> {
        let mut msg = vec![cx.port_id(REPLY).word()];
        msg.extend_from_slice(words);
        cx.message(SEND, ports::fileserver_data(), &msg)
    }

    fn next_chunk(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        let end = (self.sent + self.chunk).min(self.data.len());
        if self.sent == end {
            self.phase = Phase::Committing;
            return self.data(cx, &[]);
        }
        let words = self.data[self.sent..end].to_vec();
        self.sent = end;
        self.data(cx, &words)
    }
}

impl Behavior for Client {
    fn name(&self) -> &str {
        "client"
    }
    fn port_count(&self) -> u16 {
        2
    }
    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        if !self.started {
            self.started = true;
            self.request(cx, OP_WRITE)?;
            return Ok(Step::Busy);
        }
        let Some(t) = cx.recv(REPLY) else { return Ok(Step::Idle) };
        let Some(msg) = self.replies.feed(t) else { return Ok(Step::Busy) };
        match self.phase {
            Phase::Open => {
                assert_eq!(msg, [1], "write refused");
                self.phase = Phase::Writing;
                self.next_chunk(cx)?;
            }
            Phase::Writing => {
                assert_eq!(msg, [1]);
                self.next_chunk(cx)?;
            }
            Phase::Committing => {
                self.write_ok = msg == [1];
                self.phase = Phase::OpenRead;
                self.request(cx, OP_READ)?;
            }
            Phase::OpenRead => {
                assert_eq!(msg, [1], "read refused");
                self.phase = Phase::Reading;
            }
            Phase::Reading if msg.is_empty() => self.phase = Phase::Done,
            Phase::Reading => {
                self.chunks += 1;
                self.read.extend(msg);
                self.data(cx, &[1])?;
            }
            Phase::Done => unreachable!(),
        }
        Ok(Step::Busy)
    }
}

pub struct Outcome {
    pub write_ok: bool,
    pub read: Vec<Word>,
    pub chunks: usize,
    pub stored: Option<Vec<Word>>,
}

/// Runs a client against a file server on the first node.
pub fn transfer(data: Vec<Word>, chunk: usize) -> Outcome {
    let mut e = Engine::new(&Topology::single(), EngineConfig::default(), Arc::new(Registry::new()));
    e.set_files(Box::new(MemoryFiles::new()));
    e.bare_processor(0, 8);
    let privileged = StartOptions { privileged: true, ..StartOptions::default() };
    assert!(e.start_process(0, 0, FILESERVER_CORE, Box::new(FileServer::new()), privileged));
    assert!(e.start_process(0, 1, 1, Box::new(Client::new("f.dat", data, chunk)), StartOptions::default()));
    assert!(e.run_to_quiescence(50_000_000).is_some(), "transfer did not settle");
    let c = e.behavior::<Client>(0, 1, 1).unwrap();
    assert_eq!(c.phase, Phase::Done);
    assert_eq!(e.behavior::<FileServer>(0, 0, FILESERVER_CORE).unwrap().open_transfers(), 0);
    Outcome { write_ok: c.write_ok, read: c.read.clone(), chunks: c.chunks, stored: e.files().read("f.dat") }
}

