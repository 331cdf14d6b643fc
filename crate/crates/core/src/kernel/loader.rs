//! Program loader: turns `[requester, dimension, file name...]` into a start
//! request for the dispatcher.
//!
//! The executable file is fetched through the file server and must hold a
//! manifest for a registered program. Any failure answers `[0]` to the
//! requester.

use log::debug;

use super::fileserver::OP_READ;
use super::ports::{self, loader::*};
use super::StartRequest;
use crate::fabric::{text_words, words_text, Cx, PortId, Word};
use crate::runtime::{Assembler, Behavior, Guard, Outbox, ProgramManifest, Step, StepResult};

#[derive(Debug)]
enum Job {
    Idle,
    /// Waiting for the file server's status word.
    Opening(Pending),
    /// Receiving file chunks.
    Reading(Pending, Vec<Word>),
}

#[derive(Debug)]
struct Pending {
    requester: PortId,
    dimension: Word,
    file: String,
}

pub struct Loader {
    job: Job,
    requests: Assembler,
    replies: Assembler,
    out: Outbox,
    pub loaded: u64,
    pub refused: u64,
}

impl Default for Loader {
    fn default() -> Self {
        Self::new()
    }
}

impl Loader {
    pub fn new() -> Self {
        Loader {
            job: Job::Idle,
            requests: Assembler::default(),
            replies: Assembler::default(),
            out: Outbox::new(OUT),
            loaded: 0,
            refused: 0,
        }
    }

    fn refuse(&mut self, cx: &mut Cx<'_>, p: &Pending, why: &str) {
        debug!("load {} refused: {why}", p.file);
        self.refused += 1;
        cx.note("loads_refused", 1);
        self.out.push(p.requester, vec![0]);
    }

    fn request(&mut self, cx: &mut Cx<'_>, words: &[Word]) {
        let [requester, dimension, file @ ..] = words else {
            debug!("malformed load request {words:?}");
            return;
        };
        let p = Pending { requester: PortId::from_word(*requester), dimension: *dimension, file: words_text(file) };
        if p.file.is_empty() || p.requester.word() == 0 {
            self.refuse(cx, &p, "empty request");
            return;
        }
        let mut req = vec![cx.port_id(FILE_REPLY).word(), OP_READ];
        req.extend(text_words(&p.file));
        self.out.push(ports::fileserver_request(), req);
        self.job = Job::Opening(p);
    }

    fn reply(&mut self, cx: &mut Cx<'_>, words: Vec<Word>) {
        self.job = match std::mem::replace(&mut self.job, Job::Idle) {
            Job::Idle => Job::Idle,
            Job::Opening(p) => {
                if words == [1] {
                    Job::Reading(p, Vec::new())
                } else {
                    self.refuse(cx, &p, "no such file");
                    Job::Idle
                }
            }
            Job::Reading(p, mut content) if !words.is_empty() => {
                content.extend(words);
                self.out.push(ports::fileserver_data(), vec![cx.port_id(FILE_REPLY).word(), 1]);
                Job::Reading(p, content)
            }
            Job::Reading(p, content) => {
                self.finish(cx, p, &content);
                Job::Idle
            }
        }
    }

    fn finish(&mut self, cx: &mut Cx<'_>, p: Pending, content: &[Word]) {
        let manifest = match ProgramManifest::parse(&words_text(content)) {
            Ok(m) => m,
            Err(e) => return self.refuse(cx, &p, &e.to_string()),
        };
        if cx.manifest(&manifest.name).is_none() {
            return self.refuse(cx, &p, "program not installed");
        }
        if manifest.data_words(p.dimension).is_none() {
            return self.refuse(cx, &p, "dimension too large");
        }
        self.loaded += 1;
        let req = StartRequest {
            requester: p.requester,
            code: manifest.code_words,
            static_data: manifest.static_data_words,
            per_dimension: manifest.words_per_dimension,
            dimension: p.dimension,
            name: manifest.name,
        };
        debug!("load {} as {}", p.file, req.name);
        self.out.push(ports::dispatcher_start(), req.encode());
    }
}

impl Behavior for Loader {
    fn name(&self) -> &str {
        "loader"
    }

    fn port_count(&self) -> u16 {
        COUNT
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        let sent = self.out.pump(cx)?;
        let mut guards = vec![Guard::any(FILE_REPLY)];
        if matches!(self.job, Job::Idle) {
            guards.push(Guard::any(REQUEST));
        }
        let Some((i, token)) = cx.await_any(&guards) else {
            return Ok(if sent { Step::Busy } else { Step::Idle });
        };
        if i == 0 {
            if let Some(words) = self.replies.feed(token) {
                self.reply(cx, words);
            }
        } else if let Some(words) = self.requests.feed(token) {
            self.request(cx, &words);
        }
        Ok(Step::Busy)
    }
}
