//! System inspection tools: dispatcher table and scheduler state.

use super::tool::{put, put_message, Body, FIRST_DATA_PORT};
use crate::fabric::port::FIRST_PROCESSOR;
use crate::fabric::{text_words, Cx, PortId, Token, Word};
use crate::kernel::dispatcher::{QUERY_PROCESSORS, QUERY_TABLE};
use crate::kernel::ports::{self, scheduler};
use crate::runtime::{Assembler, Fault, Step, StepResult};

const OUT: u16 = FIRST_DATA_PORT;
const QUERY: u16 = FIRST_DATA_PORT + 1;
const REPLY: u16 = FIRST_DATA_PORT + 2;

pub const FAULT_TEXT: &str = "fault\n";

fn relay(cx: &mut Cx<'_>, dest: PortId, words: &[Word]) -> Result<(), Fault> {
    for &w in words {
        put(cx, OUT, dest, Token::Data(w))?;
    }
    put(cx, OUT, dest, Token::End)
}

/// Prints the dispatcher's node table.
#[derive(Debug, Default)]
pub struct Qdisp {
    asked: bool,
    reply: Assembler,
}

impl Body for Qdisp {
    fn name(&self) -> &str {
        "qdisp"
    }
    fn data_ports(&self) -> u16 {
        3
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        Vec::new()
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        if !self.asked {
            self.asked = true;
            put_message(cx, QUERY, ports::dispatcher_query(), &[cx.port_id(REPLY).word(), QUERY_TABLE])?;
            return Ok(Step::Busy);
        }
        let Some(t) = cx.recv(REPLY) else { return Ok(Step::Idle) };
        match self.reply.feed(t) {
            Some(text) => {
                relay(cx, outs[0], &text)?;
                Ok(Step::Stop)
            }
            None => Ok(Step::Busy),
        }
    }
}

/// Node addressed by a qsched dimension: 4 × processor + node.
pub fn node_of_dimension(dimension: Word, processors: Word) -> Option<(u16, u8)> {
    let first = 4 * FIRST_PROCESSOR as Word + 1;
    let end = 4 * (FIRST_PROCESSOR as Word).checked_add(processors)?;
    (first..end).contains(&dimension).then_some(((dimension / 4) as u16, (dimension % 4) as u8))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum QschedState {
    Start,
    Counting,
    Querying,
}

/// Prints one scheduler's state: its own node's by default, or the node
/// selected by the dimension.
#[derive(Debug)]
pub struct Qsched {
    dimension: Word,
    state: QschedState,
    reply: Assembler,
}

impl Qsched {
    pub fn new(dimension: Word) -> Self {
        Qsched { dimension, state: QschedState::Start, reply: Assembler::default() }
    }

    fn query(&mut self, cx: &mut Cx<'_>, processor: u16, node: u8) -> Result<(), Fault> {
        let dest = ports::scheduler_port(processor, node, scheduler::QUERY).ok_or_else(|| Fault::protocol("bad node"))?;
        put_message(cx, QUERY, dest, &[cx.port_id(REPLY).word()])?;
        self.state = QschedState::Querying;
        Ok(())
    }
}

impl Body for Qsched {
    fn name(&self) -> &str {
        "qsched"
    }
    fn data_ports(&self) -> u16 {
        3
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        Vec::new()
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        if self.state == QschedState::Start {
            if self.dimension == 0 {
                let own = cx.port_id(0);
                self.query(cx, own.processor(), own.node())?;
            } else {
                put_message(cx, QUERY, ports::dispatcher_query(), &[cx.port_id(REPLY).word(), QUERY_PROCESSORS])?;
                self.state = QschedState::Counting;
            }
            return Ok(Step::Busy);
        }
        let Some(t) = cx.recv(REPLY) else { return Ok(Step::Idle) };
        let Some(msg) = self.reply.feed(t) else { return Ok(Step::Busy) };
        match self.state {
            QschedState::Counting => match msg.first().and_then(|&n| node_of_dimension(self.dimension, n)) {
                Some((p, n)) => {
                    self.query(cx, p, n)?;
                    Ok(Step::Busy)
                }
                None => {
                    relay(cx, outs[0], &text_words(FAULT_TEXT))?;
                    Ok(Step::Stop)
                }
            },
            _ => {
                relay(cx, outs[0], &msg)?;
                Ok(Step::Stop)
            }
        }
    }
}
