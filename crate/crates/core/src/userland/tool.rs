//! Common shape of a tool process: negotiate ports as callee, then run the
//! tool body until it stops.
//!
//! Port layout: 0 control, 1 control reply, then the body's own ports.

use crate::fabric::{Cx, PortId, Token, Word};
use crate::runtime::negotiate::{Callee, CalleeStatus};
use crate::runtime::{Behavior, Fault, Step, StepResult};

/// First port available to a tool body.
pub const FIRST_DATA_PORT: u16 = 2;

/// The steady-state part of a tool.
pub trait Body: 'static {
    fn name(&self) -> &str;

    /// Ports used by the body, starting at [`FIRST_DATA_PORT`].
    fn data_ports(&self) -> u16;

    /// Number of output ports requested from the invoker.
    fn outputs(&self) -> Word;

    /// Input ports in announcement order. The invoker pushes them in this
    /// order, so the last one announced is consumed first.
    fn inputs(&self) -> Vec<u16>;

    /// One step after negotiation. `outs` holds the negotiated destinations.
    fn step(&mut self, cx: &mut Cx<'_>, outs: &[PortId]) -> StepResult;
}

pub struct Tool<B> {
    callee: Callee,
    ready: bool,
    pub body: B,
}

impl<B: Body> Tool<B> {
    pub fn new(body: B) -> Self {
        Tool { callee: Callee::new(body.outputs(), body.inputs()), ready: false, body }
    }
}

impl<B: Body> Behavior for Tool<B> {
    fn name(&self) -> &str {
        self.body.name()
    }

    fn port_count(&self) -> u16 {
        FIRST_DATA_PORT + self.body.data_ports()
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        if !self.ready {
            return match self.callee.step(cx)? {
                CalleeStatus::Pending => Ok(if cx.peek(0).is_some() { Step::Busy } else { Step::Idle }),
                CalleeStatus::Ready => {
                    self.ready = true;
                    Ok(Step::Busy)
                }
                CalleeStatus::Abandoned => Ok(Step::Stop),
            };
        }
        let outs = self.callee.outputs().to_vec();
        self.body.step(cx, &outs)
    }
}

/// Sends a token on `port`, connecting it to `dest` first if needed.
pub fn put(cx: &mut Cx<'_>, port: u16, dest: PortId, token: Token) -> Result<(), Fault> {
    if !cx.is_bound(port) {
        cx.connect(port, dest)?;
    }
    cx.send(port, token)
}

/// Sends a complete message: the words and END.
pub fn put_message(cx: &mut Cx<'_>, port: u16, dest: PortId, words: &[Word]) -> Result<(), Fault> {
    for &w in words {
        put(cx, port, dest, Token::Data(w))?;
    }
    put(cx, port, dest, Token::End)
}

/// Step result for a body that looked at its inputs.
pub fn idle_unless(busy: bool) -> StepResult {
    Ok(if busy { Step::Busy } else { Step::Idle })
}
