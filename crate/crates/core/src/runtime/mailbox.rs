//! Whole-message helpers for service processes.
//!
//! A service that emits through an [`Outbox`] never stalls: messages queue
//! inside the process and go out one token per step, only when the receiving
//! port has room. Services can therefore keep reading their inputs while a
//! peer is slow, which rules out send/send cycles between services.

use std::collections::VecDeque;

use super::Fault;
use crate::fabric::{Cx, PortId, Token, Word};

#[derive(Debug, Clone)]
pub struct Outbox {
    port: u16,
    queue: VecDeque<(PortId, Vec<Word>)>,
    pos: usize,
}

impl Outbox {
    pub fn new(port: u16) -> Self {
        Outbox { port, queue: VecDeque::new(), pos: 0 }
    }

    pub fn push(&mut self, dest: PortId, words: Vec<Word>) {
        self.queue.push_back((dest, words));
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    /// Emits at most one token. Returns true if a token was sent.
    pub fn pump(&mut self, cx: &mut Cx<'_>) -> Result<bool, Fault> {
        let Some((dest, words)) = self.queue.front() else { return Ok(false) };
        let dest = *dest;
        if !cx.is_bound(self.port) {
            cx.connect(self.port, dest)?;
        }
        if !cx.can_send(self.port, dest) {
            return Ok(false);
        }
        if self.pos < words.len() {
            let w = words[self.pos];
            self.pos += 1;
            cx.send_word(self.port, w)?;
        } else {
            cx.end(self.port)?;
            self.pos = 0;
            self.queue.pop_front();
        }
        Ok(true)
    }
}

/// Collects the words of whole messages arriving on one port.
#[derive(Debug, Clone, Default)]
pub struct Assembler {
    buf: Vec<Word>,
}

impl Assembler {
    /// Feeds one token; returns the finished message at END.
    pub fn feed(&mut self, token: Token) -> Option<Vec<Word>> {
        match token {
            Token::Data(w) => {
                self.buf.push(w);
                None
            }
            Token::End => Some(std::mem::take(&mut self.buf)),
        }
    }

    pub fn partial(&self) -> &[Word] {
        &self.buf
    }
}
