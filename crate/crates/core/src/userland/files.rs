//! File tools: clients of the file server.

use super::tool::{put, put_message, Body, FIRST_DATA_PORT};
use crate::fabric::{Cx, PortId, Token, Word};
use crate::kernel::fileserver::{CHUNK, OP_READ, OP_WRITE};
use crate::kernel::ports;
use crate::runtime::{Assembler, Fault, Step, StepResult};

#[derive(Debug, Clone, PartialEq, Eq)]
enum ReadState {
    Name(Vec<Word>),
    Opening,
    Receiving,
}

/// Reads a file name from its input and streams the file to its output.
#[derive(Debug)]
pub struct Fread {
    state: ReadState,
    replies: Assembler,
    pub words_read: usize,
}

impl Default for Fread {
    fn default() -> Self {
        Fread { state: ReadState::Name(Vec::new()), replies: Assembler::default(), words_read: 0 }
    }
}

const NAME: u16 = FIRST_DATA_PORT;
const READ_OUT: u16 = FIRST_DATA_PORT + 1;
const SERVER: u16 = FIRST_DATA_PORT + 2;
const REPLY: u16 = FIRST_DATA_PORT + 3;

impl Body for Fread {
    fn name(&self) -> &str {
        "fread"
    }
    fn data_ports(&self) -> u16 {
        4
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        vec![NAME]
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        if let ReadState::Name(name) = &mut self.state {
            match cx.recv(NAME) {
                Some(Token::Data(w)) => name.push(w),
                Some(Token::End) => {
                    let mut req = vec![cx.port_id(REPLY).word(), OP_READ];
                    req.extend_from_slice(name);
                    put_message(cx, SERVER, ports::fileserver_request(), &req)?;
                    self.state = ReadState::Opening;
                }
                None => return Ok(Step::Idle),
            }
            return Ok(Step::Busy);
        }
        let Some(t) = cx.recv(REPLY) else { return Ok(Step::Idle) };
        let Some(msg) = self.replies.feed(t) else { return Ok(Step::Busy) };
        match self.state {
            ReadState::Opening if msg == [1] => self.state = ReadState::Receiving,
            ReadState::Receiving if !msg.is_empty() => {
                self.words_read += msg.len();
                for w in msg {
                    put(cx, READ_OUT, outs[0], Token::Data(w))?;
                }
                put_message(cx, SERVER, ports::fileserver_data(), &[cx.port_id(REPLY).word(), 1])?;
            }
            _ => {
                put(cx, READ_OUT, outs[0], Token::End)?;
                return Ok(Step::Stop);
            }
        }
        Ok(Step::Busy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum WriteState {
    Name(Vec<Word>),
    Opening,
    /// Collecting data; `waiting` while a chunk is unacknowledged.
    Streaming { waiting: bool },
    Committing,
    /// The server refused; the data input is drained and dropped.
    Draining,
}

/// Reads a file name from one input and stores the other input's stream
/// under that name.
#[derive(Debug)]
pub struct Fwrite {
    state: WriteState,
    chunk: Vec<Word>,
    input_done: bool,
    replies: Assembler,
    pub committed: Option<bool>,
}

impl Default for Fwrite {
    fn default() -> Self {
        Fwrite {
            state: WriteState::Name(Vec::new()),
            chunk: Vec::new(),
            input_done: false,
            replies: Assembler::default(),
            committed: None,
        }
    }
}

const DATA: u16 = FIRST_DATA_PORT;
const FILENAME: u16 = FIRST_DATA_PORT + 1;

impl Fwrite {
    fn send_chunk(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        let mut msg = vec![cx.port_id(REPLY).word()];
        msg.append(&mut self.chunk);
        put_message(cx, SERVER, ports::fileserver_data(), &msg)
    }

    fn awaiting_reply(&self) -> bool {
        matches!(self.state, WriteState::Opening | WriteState::Streaming { waiting: true } | WriteState::Committing)
    }

    fn on_reply(&mut self, msg: Vec<Word>) -> Step {
        let ok = msg == [1];
        match self.state {
            WriteState::Opening | WriteState::Streaming { .. } if ok => self.state = WriteState::Streaming { waiting: false },
            WriteState::Committing => {
                self.committed = Some(ok);
                return Step::Stop;
            }
            _ => {
                self.committed = Some(false);
                self.state = WriteState::Draining;
            }
        }
        Step::Busy
    }
}

impl Body for Fwrite {
    fn name(&self) -> &str {
        "fwrite"
    }
    fn data_ports(&self) -> u16 {
        4
    }
    fn outputs(&self) -> Word {
        0
    }
    fn inputs(&self) -> Vec<u16> {
        vec![DATA, FILENAME]
    }
    fn step(&mut self, cx: &mut Cx<'_>, _outs: &[PortId]) -> StepResult {
        if self.awaiting_reply() {
            let Some(t) = cx.recv(REPLY) else { return Ok(Step::Idle) };
            return Ok(match self.replies.feed(t) {
                Some(msg) => self.on_reply(msg),
                None => Step::Busy,
            });
        }
        match &mut self.state {
            WriteState::Name(name) => match cx.recv(FILENAME) {
                Some(Token::Data(w)) => name.push(w),
                Some(Token::End) => {
                    let mut req = vec![cx.port_id(REPLY).word(), OP_WRITE];
                    req.extend_from_slice(name);
                    put_message(cx, SERVER, ports::fileserver_request(), &req)?;
                    self.state = WriteState::Opening;
                }
                None => return Ok(Step::Idle),
            },
            WriteState::Streaming { .. } => {
                if self.input_done || self.chunk.len() == CHUNK {
                    if self.chunk.is_empty() {
                        put_message(cx, SERVER, ports::fileserver_data(), &[cx.port_id(REPLY).word()])?;
                        self.state = WriteState::Committing;
                    } else {
                        self.send_chunk(cx)?;
                        self.state = WriteState::Streaming { waiting: true };
                    }
                    return Ok(Step::Busy);
                }
                match cx.recv(DATA) {
                    Some(Token::Data(w)) => self.chunk.push(w),
                    Some(Token::End) => self.input_done = true,
                    None => return Ok(Step::Idle),
                }
            }
            WriteState::Draining => {
                if self.input_done {
                    return Ok(Step::Stop);
                }
                match cx.recv(DATA) {
                    Some(Token::End) => return Ok(Step::Stop),
                    Some(_) => {}
                    None => return Ok(Step::Idle),
                }
            }
            WriteState::Opening | WriteState::Committing => unreachable!("reply states handled above"),
        }
        Ok(Step::Busy)
    }
}
