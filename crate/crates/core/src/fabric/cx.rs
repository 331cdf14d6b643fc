//! The step context: everything a behavior may do during one step.

use super::engine::{Engine, Out, StartOptions};
use super::peripheral::ConsoleInput;
use super::trace::Event;
use super::{LinkItem, PortId, Token, Word};
use crate::runtime::{Behavior, Fault, Guard, GuardKind, ProgramManifest, Reason};

pub struct Cx<'a> {
    engine: &'a mut Engine,
    instance: usize,
    node: u8,
    core: u8,
    progressed: bool,
    replacement: Option<(Box<dyn Behavior>, StartOptions)>,
}

impl<'a> Cx<'a> {
    pub(crate) fn new(engine: &'a mut Engine, instance: usize, node: u8, core: u8) -> Self {
        Cx { engine, instance, node, core, progressed: false, replacement: None }
    }

    pub(crate) fn finish(self) -> (bool, Option<(Box<dyn Behavior>, StartOptions)>) {
        (self.progressed, self.replacement)
    }

    fn slot(&self) -> &super::engine::Slot {
        self.engine.slot(self.instance, self.node, self.core).expect("running slot")
    }

    fn slot_mut(&mut self) -> &mut super::engine::Slot {
        self.engine.slot_mut(self.instance, self.node, self.core).expect("running slot")
    }

    fn port_state(&self, port: u16) -> Result<&super::engine::PortState, Fault> {
        self.slot().ports.get(port as usize).ok_or_else(|| Fault::new(Reason::NoSuchPort, format!("port {port}")))
    }

    fn port_state_mut(&mut self, port: u16) -> Result<&mut super::engine::PortState, Fault> {
        self.slot_mut().ports.get_mut(port as usize).ok_or_else(|| Fault::new(Reason::NoSuchPort, format!("port {port}")))
    }

    fn require_privilege(&self, what: &str) -> Result<(), Fault> {
        if self.slot().opts.privileged {
            Ok(())
        } else {
            Err(Fault::new(Reason::Capability, what.to_string()))
        }
    }

    // ---- identity ----

    /// System-wide address of one of this process's ports.
    pub fn port_id(&self, local: u16) -> PortId {
        self.engine.port_id_of(self.instance, self.node, self.core, local)
    }

    pub fn own_processor(&self) -> Option<u16> {
        self.engine.procs[self.instance].number
    }

    pub fn node(&self) -> u8 {
        self.node
    }

    pub fn core(&self) -> u8 {
        self.core
    }

    pub fn privileged(&self) -> bool {
        self.slot().opts.privileged
    }

    // ---- input ----

    pub fn peek(&self, port: u16) -> Option<Token> {
        self.slot().ports.get(port as usize)?.inbox.front().copied()
    }

    pub fn recv(&mut self, port: u16) -> Option<Token> {
        let t = self.slot_mut().ports.get_mut(port as usize)?.inbox.pop_front();
        if t.is_some() {
            self.progressed = true;
        }
        t
    }

    /// Consumes the head token of the first ready guard, in declaration order.
    /// Returns the guard's index and the token.
    pub fn await_any(&mut self, guards: &[Guard]) -> Option<(usize, Token)> {
        let i = guards.iter().position(|g| match (self.peek(g.port), g.kind) {
            (None, _) => false,
            (Some(_), GuardKind::Any) => true,
            (Some(t), GuardKind::End) => t.is_end(),
            (Some(t), GuardKind::Word) => !t.is_end(),
        })?;
        self.recv(guards[i].port).map(|t| (i, t))
    }

    // ---- output ----

    pub fn is_bound(&self, port: u16) -> bool {
        self.port_state(port).map(|p| p.bound.is_some()).unwrap_or(false)
    }

    pub fn bound_to(&self, port: u16) -> Option<PortId> {
        self.port_state(port).ok()?.bound
    }

    /// Binds an idle port to a destination. The connection header is sent
    /// with the first token.
    pub fn connect(&mut self, port: u16, dest: PortId) -> Result<(), Fault> {
        let ps = self.port_state_mut(port)?;
        if let Some(old) = ps.bound {
            return Err(Fault::new(Reason::ConnectWhileConnected, format!("port {port} bound to {old:?}")));
        }
        ps.bound = Some(dest);
        ps.open = false;
        Ok(())
    }

    pub fn send(&mut self, port: u16, token: Token) -> Result<(), Fault> {
        let ps = self.port_state_mut(port)?;
        let Some(dest) = ps.bound else {
            return Err(Fault::new(Reason::SendWhileIdle, format!("port {port}")));
        };
        let header = !ps.open;
        ps.open = true;
        if token.is_end() {
            ps.bound = None;
            ps.open = false;
        }
        let slot = self.slot_mut();
        if header {
            slot.outq.push_back(Out { src: port, dest, token: None });
        }
        slot.outq.push_back(Out { src: port, dest, token: Some(token) });
        self.progressed = true;
        Ok(())
    }

    pub fn send_word(&mut self, port: u16, w: Word) -> Result<(), Fault> {
        self.send(port, Token::Data(w))
    }

    pub fn send_words(&mut self, port: u16, ws: &[Word]) -> Result<(), Fault> {
        ws.iter().try_for_each(|&w| self.send_word(port, w))
    }

    pub fn end(&mut self, port: u16) -> Result<(), Fault> {
        self.send(port, Token::End)
    }

    /// A whole message: connect, words, END.
    pub fn message(&mut self, port: u16, dest: PortId, words: &[Word]) -> Result<(), Fault> {
        self.connect(port, dest)?;
        self.send_words(port, words)?;
        self.end(port)
    }

    /// True when the destination port could take one more token from `port`
    /// right now, so sending would not stall this process.
    pub fn can_send(&self, port: u16, dest: PortId) -> bool {
        self.slot().outq.is_empty() && self.engine.has_credit(self.instance, self.port_id(port), dest)
    }

    // ---- privileged capabilities ----

    pub fn link_connected(&self, link: u8) -> Result<bool, Fault> {
        self.require_privilege("link access")?;
        Ok(self.engine.link_connected(self.instance, link))
    }

    pub fn link_recv(&mut self, link: u8) -> Result<Option<Token>, Fault> {
        self.require_privilege("link access")?;
        let t = self.engine.procs[self.instance].raw_in[link as usize].pop_front();
        if t.is_some() {
            self.progressed = true;
        }
        Ok(t)
    }

    pub fn link_send(&mut self, link: u8, token: Token) -> Result<(), Fault> {
        self.require_privilege("link access")?;
        self.engine.push_link(self.instance, link, LinkItem::Raw(token));
        self.progressed = true;
        Ok(())
    }

    /// Records that a boot frame reached an already booted processor and was dropped.
    pub fn boot_discarded(&mut self, link: u8) {
        let (step, instance) = (self.engine.step, self.instance);
        self.engine.trace.record(step, Event::BootDiscarded { instance, link });
        self.note("boot_discarded", 1);
    }

    pub fn set_own_number(&mut self, number: u16) -> Result<(), Fault> {
        self.require_privilege("set processor number")?;
        self.engine.set_number(self.instance, number);
        self.progressed = true;
        Ok(())
    }

    pub fn route(&self, processor: u16) -> Option<u8> {
        self.engine.procs[self.instance].table.get(&processor).copied()
    }

    pub fn set_route(&mut self, processor: u16, link: u8) -> Result<(), Fault> {
        self.require_privilege("routing table")?;
        self.engine.set_route(self.instance, processor, link);
        self.progressed = true;
        Ok(())
    }

    /// Starts a process on this processor. Returns the address of its port 0,
    /// or `None` if the core is occupied.
    pub fn start(&mut self, node: u8, core: u8, behavior: Box<dyn Behavior>, opts: StartOptions) -> Result<Option<PortId>, Fault> {
        self.require_privilege("start process")?;
        if !self.engine.start_process(self.instance, node, core, behavior, opts) {
            return Ok(None);
        }
        self.progressed = true;
        Ok(Some(self.engine.port_id_of(self.instance, node, core, 0)))
    }

    pub fn core_busy(&self, node: u8, core: u8) -> bool {
        self.engine.slot(self.instance, node, core).is_some()
    }

    /// Stops the process on a core of this processor.
    pub fn kill(&mut self, node: u8, core: u8) -> Result<bool, Fault> {
        self.require_privilege("kill process")?;
        if (node, core) == (self.node, self.core) {
            return Err(Fault::protocol("kill self"));
        }
        let killed = match self.engine.slot_mut(self.instance, node, core) {
            Some(s) if s.stopping.is_none() => {
                s.outq.clear();
                s.stopping = Some(Reason::Killed);
                true
            }
            _ => false,
        };
        self.progressed |= killed;
        Ok(killed)
    }

    /// Replaces this process with another on the same core after this step.
    pub fn exec(&mut self, behavior: Box<dyn Behavior>, opts: StartOptions) -> Result<(), Fault> {
        self.require_privilege("exec")?;
        self.replacement = Some((behavior, opts));
        self.progressed = true;
        Ok(())
    }

    pub fn console_read(&mut self) -> Result<Option<ConsoleInput>, Fault> {
        self.require_privilege("console")?;
        let r = self.engine.console.read();
        if matches!(r, Some(ConsoleInput::Word(_))) {
            self.progressed = true;
        }
        Ok(r)
    }

    pub fn console_write(&mut self, words: &[Word]) -> Result<(), Fault> {
        self.require_privilege("console")?;
        self.engine.console.write(words);
        let step = self.engine.step;
        self.engine.trace.record(step, Event::Console { words: words.len() });
        self.progressed = true;
        Ok(())
    }

    pub fn file_read(&mut self, name: &str) -> Result<Option<Vec<Word>>, Fault> {
        self.require_privilege("file service")?;
        Ok(self.engine.files.read(name))
    }

    pub fn file_write(&mut self, name: &str, words: &[Word]) -> Result<bool, Fault> {
        self.require_privilege("file service")?;
        Ok(self.engine.files.write(name, words))
    }

    pub fn manifest(&self, name: &str) -> Option<ProgramManifest> {
        self.engine.registry.manifest(name).cloned()
    }

    pub fn instantiate(&self, name: &str, dimension: Word) -> Result<Option<Box<dyn Behavior>>, Fault> {
        self.require_privilege("instantiate")?;
        Ok(self.engine.registry.instantiate(name, dimension))
    }

    pub fn boot_image(&self) -> Vec<Word> {
        self.engine.boot_rom.clone()
    }

    /// Tick and executed-step counters of this process's node.
    pub fn node_clock(&self) -> (u32, u32) {
        self.engine.clock(self.instance, self.node)
    }

    /// Adds to a named engine counter. Observational only.
    pub fn note(&mut self, key: &'static str, delta: i64) {
        *self.engine.counters.entry(key).or_insert(0) += delta;
    }
}
