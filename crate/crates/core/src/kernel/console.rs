//! Console driver: owns the host input and output lines.
//!
//! Any process may reserve input by connecting to the reservation port and
//! sending its input port word; input then streams to that port until the
//! holder closes the reservation connection. Reservations made while input
//! is held wait in line. Each message sent to the output port is written to
//! the output line as a whole.
//!
//! The console also launches the initial user process, acting as its
//! invoker: it asks the loader to start the program and gives it the
//! console output as every output port.

use log::warn;

use super::ports::{self, console::*};
use crate::fabric::{text_words, ConsoleInput, Cx, PortId, Token};
use crate::runtime::negotiate::{Invoker, Negotiation};
use crate::runtime::{Assembler, Behavior, Fault, Guard, Outbox, Step, StepResult};

pub struct Console {
    holder: Option<PortId>,
    /// The reservation connection delivered its port word.
    reserving: bool,
    eof_sent: bool,
    output: Assembler,
    launch_reader: Assembler,
    launch: Option<Invoker>,
    requests: Outbox,
    pub launched: Option<PortId>,
}

impl Default for Console {
    fn default() -> Self {
        Self::new()
    }
}

impl Console {
    pub fn new() -> Self {
        Console {
            holder: None,
            reserving: false,
            eof_sent: false,
            output: Assembler::default(),
            launch_reader: Assembler::default(),
            launch: None,
            requests: Outbox::new(CONTROL_OUT),
            launched: None,
        }
    }

    pub fn holder(&self) -> Option<PortId> {
        self.holder
    }

    fn diagnostic(&mut self, cx: &mut Cx<'_>, text: &str) -> Result<(), Fault> {
        warn!("{}", text.trim_end());
        cx.console_write(&text_words(text))
    }

    fn forward_input(&mut self, cx: &mut Cx<'_>) -> Result<bool, Fault> {
        let Some(holder) = self.holder else { return Ok(false) };
        if self.eof_sent {
            return Ok(false);
        }
        if !cx.is_bound(HOLDER) {
            cx.connect(HOLDER, holder)?;
        }
        if !cx.can_send(HOLDER, holder) {
            return Ok(false);
        }
        match cx.console_read()? {
            Some(ConsoleInput::Word(w)) => cx.send_word(HOLDER, w)?,
            Some(ConsoleInput::Eof) => {
                cx.end(HOLDER)?;
                self.eof_sent = true;
            }
            None => return Ok(false),
        }
        Ok(true)
    }

    fn reservation(&mut self, cx: &mut Cx<'_>, token: Token) -> Result<(), Fault> {
        match token {
            Token::Data(w) if !self.reserving => {
                self.reserving = true;
                self.eof_sent = false;
                self.holder = Some(PortId::from_word(w));
            }
            Token::Data(_) => {}
            Token::End => {
                self.reserving = false;
                self.holder = None;
                if cx.is_bound(HOLDER) {
                    cx.end(HOLDER)?;
                }
            }
        }
        Ok(())
    }

    fn control(&mut self, cx: &mut Cx<'_>, token: Token) -> Result<(), Fault> {
        let Some(inv) = self.launch.as_mut() else { return Ok(()) };
        match inv.feed(cx, token, ports::console_output)? {
            Negotiation::Pending => {}
            Negotiation::Done(_) => self.launched = inv.control,
            Negotiation::Failed(why) => {
                let text = format!("init: {why}\n");
                self.diagnostic(cx, &text)?;
            }
        }
        Ok(())
    }
}

impl Behavior for Console {
    fn name(&self) -> &str {
        "console"
    }

    fn port_count(&self) -> u16 {
        COUNT
    }

    fn privileged_only_ports(&self) -> &'static [u16] {
        &[LAUNCH]
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        let mut busy = self.requests.pump(cx)?;
        let guards = [Guard::any(LAUNCH), Guard::any(CONTROL_IN), Guard::any(OUTPUT), Guard::any(RESERVE)];
        if let Some((i, token)) = cx.await_any(&guards) {
            busy = true;
            match i {
                0 => {
                    if let Some(name) = self.launch_reader.feed(token) {
                        if self.launch.is_none() {
                            let req = Invoker::request(cx, CONTROL_IN, 0, &name);
                            self.requests.push(ports::port_loader(), req);
                            self.launch = Some(Invoker::new(CONTROL_OUT, CONTROL_IN));
                        }
                    }
                }
                1 => self.control(cx, token)?,
                2 => {
                    if let Some(words) = self.output.feed(token) {
                        cx.console_write(&words)?;
                    }
                }
                _ => self.reservation(cx, token)?,
            }
        }
        busy |= self.forward_input(cx)?;
        Ok(if busy { Step::Busy } else { Step::Idle })
    }
}
