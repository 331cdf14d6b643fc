//! Initial port negotiation between a process and the process that started it.
//!
//! ```text
//! invoker                          callee (control port 0, reply port 1)
//!   start request to the loader
//!   <- ack: control port, END
//!   -> own reply port word
//!                                   <- number of output ports
//!   -> one port word per output
//!                                   <- number of input ports
//!                                   <- one port word per input
//!                                   <- END
//!   -> END
//! ```
//!
//! Only after the final END does either side move payload.

use crate::fabric::{Cx, PortId, Token, Word};

use super::Fault;

/// Callee control port.
pub const CONTROL: u16 = 0;
/// Callee port used to answer the invoker.
pub const CONTROL_REPLY: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Negotiation {
    Pending,
    /// Finished; the invoker got these input ports, in arrival order.
    Done(Vec<PortId>),
    Failed(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InvokerState {
    AwaitAck,
    AwaitAckEnd(PortId),
    AwaitOutputs,
    AwaitInputCount,
    AwaitInputs(Word),
    AwaitEnd,
    Finished,
}

/// Invoker side, fed with the tokens arriving on the invoker's reply port.
#[derive(Debug, Clone)]
pub struct Invoker {
    out: u16,
    reply: u16,
    state: InvokerState,
    inputs: Vec<PortId>,
    pub control: Option<PortId>,
}

impl Invoker {
    /// `out` is the invoker's port for talking to the callee, `reply` the
    /// port on which the loader ack and the callee's answers arrive.
    pub fn new(out: u16, reply: u16) -> Self {
        Invoker { out, reply, state: InvokerState::AwaitAck, inputs: Vec::new(), control: None }
    }

    /// The start request to send to the loader.
    pub fn request(cx: &Cx<'_>, reply: u16, dimension: Word, file: &[Word]) -> Vec<Word> {
        let mut v = vec![cx.port_id(reply).word(), dimension];
        v.extend_from_slice(file);
        v
    }

    /// Processes one reply token. `output` supplies a port for each output
    /// the callee asks for.
    pub fn feed(&mut self, cx: &mut Cx<'_>, token: Token, mut output: impl FnMut() -> PortId) -> Result<Negotiation, Fault> {
        use InvokerState::*;
        let fail = |this: &mut Self, cx: &mut Cx<'_>, why| -> Result<Negotiation, Fault> {
            if cx.is_bound(this.out) {
                cx.end(this.out)?;
            }
            this.state = Finished;
            Ok(Negotiation::Failed(why))
        };
        self.state = match (self.state, token) {
            (AwaitAck, Token::Data(0)) => return fail(self, cx, "start failed"),
            (AwaitAck, Token::Data(w)) => AwaitAckEnd(PortId::from_word(w)),
            (AwaitAckEnd(ctrl), Token::End) => {
                self.control = Some(ctrl);
                cx.connect(self.out, ctrl)?;
                cx.send_word(self.out, cx.port_id(self.reply).word())?;
                AwaitOutputs
            }
            (AwaitOutputs, Token::Data(n)) => {
                for _ in 0..n {
                    let p = output();
                    cx.send_word(self.out, p.word())?;
                }
                AwaitInputCount
            }
            (AwaitInputCount, Token::Data(n)) => AwaitInputs(n),
            (AwaitInputs(n), Token::Data(p)) if n > 0 => {
                self.inputs.push(PortId::from_word(p));
                AwaitInputs(n - 1)
            }
            (AwaitInputs(0), Token::End) => AwaitEnd,
            (_, _) => return fail(self, cx, "broken negotiation"),
        };
        if self.state == AwaitEnd {
            cx.end(self.out)?;
            self.state = Finished;
            return Ok(Negotiation::Done(std::mem::take(&mut self.inputs)));
        }
        Ok(Negotiation::Pending)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CalleeState {
    AwaitInvoker,
    AwaitOutputs,
    AwaitEnd,
    Ready,
}

/// What the callee side of a negotiation step produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalleeStatus {
    Pending,
    Ready,
    /// The invoker closed the control channel instead of negotiating.
    Abandoned,
}

/// Callee side. Consumes tokens from the control port.
#[derive(Debug, Clone)]
pub struct Callee {
    n_out: Word,
    inputs: Vec<u16>,
    outputs: Vec<PortId>,
    state: CalleeState,
}

impl Callee {
    /// `inputs` are local input ports in announcement order.
    pub fn new(n_out: Word, inputs: Vec<u16>) -> Self {
        Callee { n_out, inputs, outputs: Vec::new(), state: CalleeState::AwaitInvoker }
    }

    pub fn outputs(&self) -> &[PortId] {
        &self.outputs
    }

    pub fn is_ready(&self) -> bool {
        self.state == CalleeState::Ready
    }

    fn announce(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        cx.send_word(CONTROL_REPLY, self.inputs.len() as Word)?;
        for &p in &self.inputs {
            cx.send_word(CONTROL_REPLY, cx.port_id(p).word())?;
        }
        cx.end(CONTROL_REPLY)?;
        self.state = CalleeState::AwaitEnd;
        Ok(())
    }

    pub fn step(&mut self, cx: &mut Cx<'_>) -> Result<CalleeStatus, Fault> {
        use CalleeState::*;
        if self.state == Ready {
            return Ok(CalleeStatus::Ready);
        }
        let Some(token) = cx.recv(CONTROL) else { return Ok(CalleeStatus::Pending) };
        match (self.state, token) {
            (AwaitInvoker, Token::Data(inv)) => {
                cx.connect(CONTROL_REPLY, PortId::from_word(inv))?;
                cx.send_word(CONTROL_REPLY, self.n_out)?;
                if self.n_out == 0 {
                    self.announce(cx)?;
                } else {
                    self.state = AwaitOutputs;
                }
            }
            (AwaitInvoker, Token::End) => return Ok(CalleeStatus::Abandoned),
            (AwaitOutputs, Token::Data(p)) => {
                self.outputs.push(PortId::from_word(p));
                if self.outputs.len() as Word == self.n_out {
                    self.announce(cx)?;
                }
            }
            (AwaitEnd, Token::End) => {
                self.state = Ready;
                return Ok(CalleeStatus::Ready);
            }
            (_, Token::End) => {
                if cx.is_bound(CONTROL_REPLY) {
                    cx.end(CONTROL_REPLY)?;
                }
                return Ok(CalleeStatus::Abandoned);
            }
            (state, t) => return Err(Fault::protocol(format!("negotiation in {state:?} got {t:?}"))),
        }
        Ok(CalleeStatus::Pending)
    }
}
