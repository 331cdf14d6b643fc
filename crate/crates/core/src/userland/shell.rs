//! The user shell: reads command lines from the console and wires up
//! process networks.
//!
//! Commands are started left to right. Each new process takes its output
//! ports from the top of the port stack (the console output when the stack
//! is empty) and pushes its announced input ports. A quoted string is sent
//! into the port it pops. At the end of a line the top port receives the
//! next console line and every other stacked port receives END.

use log::debug;

use super::tool::put_message;
use crate::fabric::{text_words, Cx, PortId, Token, Word};
use crate::kernel::ports;
use crate::runtime::negotiate::{Callee, CalleeStatus, Invoker, Negotiation};
use crate::runtime::{Behavior, Fault, Step, StepResult};

pub const STACK_CAPACITY: usize = 128;
pub const NAME_CAPACITY: usize = 80;
pub const PROMPT: &str = "> ";
pub const FAULT: &str = "fault\n";
pub const STOP: &str = "stop\n";
pub const EXTENSION: &str = ".nop";

const IN: u16 = 2;
const OUT: u16 = 3;
const CMD: u16 = 4;
const RESERVE: u16 = 5;
const PORTS: u16 = 6;

const NEWLINE: Word = '\n' as Word;
const QUOTE: Word = '"' as Word;
const SPACE: Word = ' ' as Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Negotiating,
    Reserve,
    Prompt,
    Input,
    Name,
    Dimension,
    /// Waiting for the loader and then negotiating with the new process.
    /// Holds the character that ended the command.
    Command(Word),
    /// Skipping the remains of a failed command's conversation.
    Drain(Word),
    Console,
    Str,
    Quote,
    /// Skipping the rest of a line after an error.
    Discard,
}

/// Counters for tests and diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ShellStats {
    pub lines: u64,
    pub commands: u64,
    pub faults: u64,
}

pub struct Shell {
    callee: Callee,
    state: State,
    stdout: PortId,
    stack: Vec<PortId>,
    name: Vec<Word>,
    dimension: Word,
    invoker: Option<Invoker>,
    /// Destination of the current string or console line.
    target: Option<PortId>,
    pub stats: ShellStats,
}

impl Default for Shell {
    fn default() -> Self {
        Self::new()
    }
}

impl Shell {
    pub fn new() -> Self {
        Shell {
            callee: Callee::new(1, Vec::new()),
            state: State::Negotiating,
            stdout: PortId::from_word(0),
            stack: Vec::with_capacity(STACK_CAPACITY),
            name: Vec::with_capacity(NAME_CAPACITY),
            dimension: 0,
            invoker: None,
            target: None,
            stats: ShellStats::default(),
        }
    }

    pub fn stack_depth(&self) -> usize {
        self.stack.len()
    }

    fn print(&mut self, cx: &mut Cx<'_>, text: &str) -> Result<(), Fault> {
        put_message(cx, OUT, self.stdout, &text_words(text))
    }

    fn send(&mut self, cx: &mut Cx<'_>, token: Token) -> Result<(), Fault> {
        let dest = self.target.unwrap_or(self.stdout);
        if !cx.is_bound(CMD) {
            cx.connect(CMD, dest)?;
        }
        cx.send(CMD, token)
    }

    /// Closes every stacked port.
    fn nil_input(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        while let Some(p) = self.stack.pop() {
            put_message(cx, CMD, p, &[])?;
        }
        Ok(())
    }

    fn error(&mut self, cx: &mut Cx<'_>, c: Word) -> Result<(), Fault> {
        self.stats.faults += 1;
        self.print(cx, FAULT)?;
        self.nil_input(cx)?;
        self.state = if c == NEWLINE { State::Prompt } else { State::Discard };
        Ok(())
    }

    /// Handles a character that separates terms.
    fn space(&mut self, cx: &mut Cx<'_>, c: Word) -> Result<(), Fault> {
        if c != NEWLINE {
            self.state = State::Input;
            return Ok(());
        }
        self.stats.lines += 1;
        match self.stack.pop() {
            Some(top) => {
                self.nil_input(cx)?;
                self.target = Some(top);
                self.state = State::Console;
            }
            None => self.state = State::Prompt,
        }
        Ok(())
    }

    fn command(&mut self, cx: &mut Cx<'_>, c: Word) -> Result<(), Fault> {
        let mut file = self.name.clone();
        file.extend(text_words(EXTENSION));
        debug!("command {:?}:{}", crate::fabric::words_text(&file), self.dimension);
        self.stats.commands += 1;
        let req = Invoker::request(cx, CMD, self.dimension, &file);
        put_message(cx, CMD, ports::port_loader(), &req)?;
        self.invoker = Some(Invoker::new(CMD, CMD));
        self.state = State::Command(c);
        Ok(())
    }

    fn negotiate(&mut self, cx: &mut Cx<'_>, token: Token, c: Word) -> Result<(), Fault> {
        let mut inv = self.invoker.take().expect("negotiating");
        let stdout = self.stdout;
        let stack = &mut self.stack;
        match inv.feed(cx, token, || stack.pop().unwrap_or(stdout))? {
            Negotiation::Pending => self.invoker = Some(inv),
            Negotiation::Done(inputs) => {
                for p in inputs {
                    if self.stack.len() < STACK_CAPACITY {
                        self.stack.push(p);
                    }
                }
                if self.stack.len() >= STACK_CAPACITY {
                    self.error(cx, c)?;
                } else {
                    self.space(cx, c)?;
                }
            }
            Negotiation::Failed(why) => {
                debug!("command failed: {why}");
                if token.is_end() {
                    self.error(cx, c)?;
                } else {
                    self.state = State::Drain(c);
                }
            }
        }
        Ok(())
    }

    fn input(&mut self, cx: &mut Cx<'_>, c: Word) -> Result<(), Fault> {
        match self.state {
            State::Input => {
                if c == QUOTE {
                    self.target = self.stack.pop();
                    self.state = State::Str;
                } else if c > SPACE {
                    self.name.clear();
                    self.name.push(c);
                    self.state = State::Name;
                } else {
                    self.space(cx, c)?;
                }
            }
            State::Name => {
                self.dimension = 0;
                if c == ':' as Word {
                    self.state = State::Dimension;
                } else if c > SPACE {
                    if self.name.len() == NAME_CAPACITY {
                        return self.error(cx, c);
                    }
                    self.name.push(c);
                } else {
                    self.command(cx, c)?;
                }
            }
            State::Dimension => {
                if c <= SPACE {
                    return self.command(cx, c);
                }
                let digit = c.wrapping_sub('0' as Word);
                match self.dimension.checked_mul(10).and_then(|d| d.checked_add(digit)) {
                    Some(d) if digit < 10 => self.dimension = d,
                    _ => return self.error(cx, c),
                }
            }
            State::Console => {
                self.send(cx, Token::Data(c))?;
                if c == NEWLINE {
                    self.send(cx, Token::End)?;
                    self.target = None;
                    self.space(cx, c)?;
                }
            }
            State::Str => {
                if c == QUOTE {
                    self.state = State::Quote;
                } else {
                    self.send(cx, Token::Data(c))?;
                }
            }
            State::Quote => {
                if c == QUOTE {
                    self.send(cx, Token::Data(QUOTE))?;
                    self.state = State::Str;
                } else {
                    self.send(cx, Token::End)?;
                    self.target = None;
                    self.space(cx, c)?;
                }
            }
            State::Discard => {
                if c == NEWLINE {
                    self.state = State::Prompt;
                }
            }
            _ => unreachable!("not an input state"),
        }
        Ok(())
    }

    fn end_of_input(&mut self, cx: &mut Cx<'_>) -> Result<(), Fault> {
        if cx.is_bound(CMD) || self.target.is_some() {
            self.send(cx, Token::End)?;
        }
        self.target = None;
        self.nil_input(cx)?;
        self.print(cx, STOP)?;
        if cx.is_bound(RESERVE) {
            cx.end(RESERVE)?;
        }
        Ok(())
    }
}

impl Behavior for Shell {
    fn name(&self) -> &str {
        "ulsh"
    }

    fn port_count(&self) -> u16 {
        PORTS
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        match self.state {
            State::Negotiating => match self.callee.step(cx)? {
                CalleeStatus::Pending => Ok(if cx.peek(0).is_some() { Step::Busy } else { Step::Idle }),
                CalleeStatus::Abandoned => Ok(Step::Stop),
                CalleeStatus::Ready => {
                    self.stdout = self.callee.outputs()[0];
                    self.state = State::Reserve;
                    Ok(Step::Busy)
                }
            },
            State::Reserve => {
                cx.connect(RESERVE, ports::console_reserve())?;
                cx.send_word(RESERVE, cx.port_id(IN).word())?;
                self.state = State::Prompt;
                Ok(Step::Busy)
            }
            State::Prompt => {
                self.print(cx, PROMPT)?;
                self.state = State::Input;
                Ok(Step::Busy)
            }
            State::Command(c) => {
                let Some(t) = cx.recv(CMD) else { return Ok(Step::Idle) };
                self.negotiate(cx, t, c)?;
                Ok(Step::Busy)
            }
            State::Drain(c) => {
                match cx.recv(CMD) {
                    Some(Token::End) => self.error(cx, c)?,
                    Some(_) => {}
                    None => return Ok(Step::Idle),
                }
                Ok(Step::Busy)
            }
            _ => match cx.recv(IN) {
                Some(Token::Data(c)) => {
                    self.input(cx, c)?;
                    Ok(Step::Busy)
                }
                Some(Token::End) => {
                    self.end_of_input(cx)?;
                    Ok(Step::Stop)
                }
                None => Ok(Step::Idle),
            },
        }
    }
}
