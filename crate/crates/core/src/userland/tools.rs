//! Stream tools.

use std::collections::VecDeque;

use super::text::{upper_word, Filler};
use super::tool::{idle_unless, put, Body, FIRST_DATA_PORT};
use crate::fabric::{text_words, Cx, PortId, Token, Word};
use crate::runtime::{Step, StepResult};

const IN: u16 = FIRST_DATA_PORT;
const IN2: u16 = FIRST_DATA_PORT + 1;

pub const HELLO_TEXT: &str = "Hello World\n";

/// Copies `in` to the output, upper-casing latin letters.
#[derive(Debug, Default)]
pub struct Upper;

impl Body for Upper {
    fn name(&self) -> &str {
        "upper"
    }
    fn data_ports(&self) -> u16 {
        2
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        vec![IN]
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        match cx.recv(IN) {
            Some(Token::Data(w)) => put(cx, IN + 1, outs[0], Token::Data(upper_word(w)))?,
            Some(Token::End) => {
                put(cx, IN + 1, outs[0], Token::End)?;
                return Ok(Step::Stop);
            }
            None => return Ok(Step::Idle),
        }
        Ok(Step::Busy)
    }
}

/// Refills text to lines of at most `width` code points.
#[derive(Debug)]
pub struct Parafill {
    filler: Filler,
}

impl Parafill {
    pub fn new(width: Word) -> Self {
        Parafill { filler: Filler::new(width as usize) }
    }
}

impl Body for Parafill {
    fn name(&self) -> &str {
        "parafill"
    }
    fn data_ports(&self) -> u16 {
        2
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        vec![IN]
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        let mut out = Vec::new();
        let done = match cx.recv(IN) {
            Some(Token::Data(w)) => {
                self.filler.feed(w, &mut out);
                false
            }
            Some(Token::End) => {
                self.filler.finish(&mut out);
                true
            }
            None => return Ok(Step::Idle),
        };
        for w in out {
            put(cx, IN + 1, outs[0], Token::Data(w))?;
        }
        if done {
            put(cx, IN + 1, outs[0], Token::End)?;
            return Ok(Step::Stop);
        }
        Ok(Step::Busy)
    }
}

/// Forwards the first input, then the second.
#[derive(Debug, Default)]
pub struct Concat {
    second: bool,
}

impl Body for Concat {
    fn name(&self) -> &str {
        "concat"
    }
    fn data_ports(&self) -> u16 {
        3
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        vec![IN2, IN]
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        let port = if self.second { IN2 } else { IN };
        match cx.recv(port) {
            Some(Token::Data(w)) => put(cx, IN2 + 1, outs[0], Token::Data(w))?,
            Some(Token::End) if !self.second => self.second = true,
            Some(Token::End) => {
                put(cx, IN2 + 1, outs[0], Token::End)?;
                return Ok(Step::Stop);
            }
            None => return Ok(Step::Idle),
        }
        Ok(Step::Busy)
    }
}

/// Copies the input to both outputs.
#[derive(Debug, Default)]
pub struct Dup;

impl Body for Dup {
    fn name(&self) -> &str {
        "dup"
    }
    fn data_ports(&self) -> u16 {
        3
    }
    fn outputs(&self) -> Word {
        2
    }
    fn inputs(&self) -> Vec<u16> {
        vec![IN]
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        let Some(t) = cx.recv(IN) else { return Ok(Step::Idle) };
        put(cx, IN + 1, outs[0], t)?;
        put(cx, IN + 2, outs[1], t)?;
        Ok(if t.is_end() { Step::Stop } else { Step::Busy })
    }
}

/// Ring buffer between input and output. Reading pauses while it is full.
#[derive(Debug)]
pub struct Buf {
    capacity: usize,
    ring: VecDeque<Word>,
    input_done: bool,
    pub high_water: usize,
}

impl Buf {
    pub fn new(capacity: Word) -> Self {
        let capacity = (capacity as usize).max(1);
        Buf { capacity, ring: VecDeque::with_capacity(capacity), input_done: false, high_water: 0 }
    }
}

impl Body for Buf {
    fn name(&self) -> &str {
        "buf"
    }
    fn data_ports(&self) -> u16 {
        2
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        vec![IN]
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        let out = IN + 1;
        let mut busy = false;
        if !self.input_done && self.ring.len() < self.capacity {
            match cx.recv(IN) {
                Some(Token::Data(w)) => {
                    self.ring.push_back(w);
                    self.high_water = self.high_water.max(self.ring.len());
                    busy = true;
                }
                Some(Token::End) => {
                    self.input_done = true;
                    busy = true;
                }
                None => {}
            }
        }
        if !cx.is_bound(out) {
            cx.connect(out, outs[0])?;
        }
        if cx.can_send(out, outs[0]) {
            if let Some(w) = self.ring.pop_front() {
                cx.send_word(out, w)?;
                busy = true;
            } else if self.input_done {
                cx.end(out)?;
                return Ok(Step::Stop);
            }
        }
        idle_unless(busy)
    }
}

/// Interleaves two inputs line by line, taking turns when both have data.
#[derive(Debug, Default)]
pub struct Merge {
    current: Option<usize>,
    ended: [bool; 2],
    turn: usize,
}

impl Body for Merge {
    fn name(&self) -> &str {
        "merge"
    }
    fn data_ports(&self) -> u16 {
        3
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        vec![IN2, IN]
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        let out = IN2 + 1;
        if self.ended == [true, true] {
            put(cx, out, outs[0], Token::End)?;
            return Ok(Step::Stop);
        }
        let source = match self.current {
            Some(i) => i,
            None => {
                let ready = |i: usize| !self.ended[i] && cx.peek(IN + i as u16).is_some();
                let first = self.turn;
                let Some(i) = [first, 1 - first].into_iter().find(|&i| ready(i)) else {
                    return Ok(Step::Idle);
                };
                self.turn = 1 - i;
                self.current = Some(i);
                i
            }
        };
        match cx.recv(IN + source as u16) {
            Some(Token::Data(w)) => {
                put(cx, out, outs[0], Token::Data(w))?;
                if w == '\n' as Word {
                    self.current = None;
                }
            }
            Some(Token::End) => {
                self.ended[source] = true;
                self.current = None;
            }
            None => return Ok(Step::Idle),
        }
        Ok(Step::Busy)
    }
}

/// Emits an empty stream.
#[derive(Debug, Default)]
pub struct Nil;

impl Body for Nil {
    fn name(&self) -> &str {
        "nil"
    }
    fn data_ports(&self) -> u16 {
        1
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        Vec::new()
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        put(cx, IN, outs[0], Token::End)?;
        Ok(Step::Stop)
    }
}

/// Discards its input.
#[derive(Debug, Default)]
pub struct Absorb {
    pub consumed: u64,
}

impl Body for Absorb {
    fn name(&self) -> &str {
        "absorb"
    }
    fn data_ports(&self) -> u16 {
        1
    }
    fn outputs(&self) -> Word {
        0
    }
    fn inputs(&self) -> Vec<u16> {
        vec![IN]
    }
    fn step(&mut self, cx: &mut Cx<'_>, _outs: &[PortId]) -> StepResult {
        match cx.recv(IN) {
            Some(Token::Data(_)) => {
                self.consumed += 1;
                Ok(Step::Busy)
            }
            Some(Token::End) => Ok(Step::Stop),
            None => Ok(Step::Idle),
        }
    }
}

/// Emits a fixed greeting.
#[derive(Debug, Default)]
pub struct Hello;

impl Body for Hello {
    fn name(&self) -> &str {
        "hello"
    }
    fn data_ports(&self) -> u16 {
        1
    }
    fn outputs(&self) -> Word {
        1
    }
    fn inputs(&self) -> Vec<u16> {
        Vec::new()
    }
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult {
        for w in text_words(HELLO_TEXT) {
            put(cx, IN, outs[0], Token::Data(w))?;
        }
        put(cx, IN, outs[0], Token::End)?;
        Ok(Step::Stop)
    }
}
