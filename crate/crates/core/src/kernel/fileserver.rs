//! File server: whole-file transfers between the host file store and
//! processes. Transfers of different clients proceed side by side; a new
//! request from a client replaces its unfinished transfer.
//!
//! ```text
//! read:  client -> REQUEST [client, 0, name...]
//!        server -> client  [0]                    no such file
//!                          [1]                    then per chunk:
//!        server -> client  [chunk...]             at most CHUNK words
//!        client -> DATA    [client, 1]            ack (0 aborts)
//!        server -> client  []                     end of file
//!
//! write: client -> REQUEST [client, 1, name...]
//!        server -> client  [1]
//!        client -> DATA    [client, chunk...]     acked with [1]
//!        client -> DATA    [client]               commit
//!        server -> client  [1] or [0]             final status
//! ```

use std::collections::BTreeMap;

use log::{debug, warn};

use super::ports::fileserver::*;
use crate::fabric::{words_text, Cx, PortId, Word};
use crate::runtime::{Assembler, Behavior, Fault, Guard, Outbox, Step, StepResult};

pub const CHUNK: usize = 128;
pub const OP_READ: Word = 0;
pub const OP_WRITE: Word = 1;

#[derive(Debug)]
enum Transfer {
    Reading { words: Vec<Word>, pos: usize },
    Writing { name: String, words: Vec<Word> },
}

pub struct FileServer {
    transfers: BTreeMap<Word, Transfer>,
    requests: Assembler,
    data: Assembler,
    out: Outbox,
    pub reads: u64,
    pub writes: u64,
}

impl Default for FileServer {
    fn default() -> Self {
        Self::new()
    }
}

impl FileServer {
    pub fn new() -> Self {
        FileServer {
            transfers: BTreeMap::new(),
            requests: Assembler::default(),
            data: Assembler::default(),
            out: Outbox::new(OUT),
            reads: 0,
            writes: 0,
        }
    }

    /// Unfinished transfers.
    pub fn open_transfers(&self) -> usize {
        self.transfers.len()
    }

    fn request(&mut self, cx: &mut Cx<'_>, words: &[Word]) -> Result<(), Fault> {
        let [client, op, name @ ..] = words else {
            warn!("malformed file request {words:?}");
            return Ok(());
        };
        let key = *client;
        let client = PortId::from_word(key);
        let name = words_text(name);
        if self.transfers.remove(&key).is_some() {
            cx.note("file_transfer_replaced", 1);
        }
        match *op {
            OP_READ => match cx.file_read(&name)? {
                Some(words) => {
                    debug!("read {name}: {} words", words.len());
                    self.reads += 1;
                    self.out.push(client, vec![1]);
                    self.transfers.insert(key, Transfer::Reading { words, pos: 0 });
                    self.next_chunk(key);
                }
                None => self.out.push(client, vec![0]),
            },
            OP_WRITE if !name.is_empty() => {
                self.out.push(client, vec![1]);
                self.transfers.insert(key, Transfer::Writing { name, words: Vec::new() });
            }
            _ => self.out.push(client, vec![0]),
        }
        Ok(())
    }

    /// Queues the next chunk of a read, or the closing empty message.
    fn next_chunk(&mut self, key: Word) {
        let Some(Transfer::Reading { words, pos }) = self.transfers.get_mut(&key) else { return };
        let client = PortId::from_word(key);
        if *pos >= words.len() {
            self.out.push(client, Vec::new());
            self.transfers.remove(&key);
            return;
        }
        let end = (*pos + CHUNK).min(words.len());
        self.out.push(client, words[*pos..end].to_vec());
        *pos = end;
    }

    fn data(&mut self, cx: &mut Cx<'_>, words: &[Word]) -> Result<(), Fault> {
        let Some((&key, rest)) = words.split_first() else { return Ok(()) };
        let client = PortId::from_word(key);
        match self.transfers.get_mut(&key) {
            Some(Transfer::Reading { .. }) => {
                if rest == [1] {
                    self.next_chunk(key);
                } else {
                    self.transfers.remove(&key);
                }
            }
            Some(Transfer::Writing { words, .. }) => {
                if rest.is_empty() {
                    let Some(Transfer::Writing { name, words }) = self.transfers.remove(&key) else { unreachable!() };
                    let ok = cx.file_write(&name, &words)?;
                    debug!("write {name}: {} words, ok {ok}", words.len());
                    self.writes += ok as u64;
                    self.out.push(client, vec![ok as Word]);
                } else {
                    words.extend_from_slice(rest);
                    self.out.push(client, vec![1]);
                }
            }
            None => {
                warn!("file data from {client:?} outside a transfer");
                cx.note("file_data_ignored", 1);
            }
        }
        Ok(())
    }
}

impl Behavior for FileServer {
    fn name(&self) -> &str {
        "files"
    }

    fn port_count(&self) -> u16 {
        COUNT
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        let sent = self.out.pump(cx)?;
        let Some((i, token)) = cx.await_any(&[Guard::any(DATA), Guard::any(REQUEST)]) else {
            return Ok(if sent { Step::Busy } else { Step::Idle });
        };
        if i == 0 {
            if let Some(words) = self.data.feed(token) {
                self.data(cx, &words)?;
            }
        } else if let Some(words) = self.requests.feed(token) {
            self.request(cx, &words)?;
        }
        Ok(Step::Busy)
    }
}
