//! Well-known service locations.
//!
//! All services of the first node live on processor 8, node 0; schedulers
//! occupy core 0 of every other node.

use crate::fabric::port::FIRST_PROCESSOR;
use crate::fabric::PortId;

pub const CONSOLE_CORE: u8 = 1;
pub const DISPATCHER_CORE: u8 = 2;
pub const LOADER_CORE: u8 = 3;
pub const FILESERVER_CORE: u8 = 4;
pub const SCHEDULER_CORE: u8 = 0;

pub mod console {
    /// Output toward the current input holder.
    pub const HOLDER: u16 = 0;
    /// Input reservation: a client sends its port word and holds the
    /// connection open until it releases input.
    pub const RESERVE: u16 = 1;
    /// Every message sent here is written to the output line.
    pub const OUTPUT: u16 = 2;
    /// Launch request for the initial user process: program file name.
    pub const LAUNCH: u16 = 3;
    /// Outgoing control traffic while acting as invoker.
    pub const CONTROL_OUT: u16 = 4;
    /// Replies while acting as invoker.
    pub const CONTROL_IN: u16 = 5;
    pub const COUNT: u16 = 6;
}

pub mod dispatcher {
    pub const START: u16 = 0;
    pub const QUERY: u16 = 1;
    pub const REPORT: u16 = 2;
    pub const OUT: u16 = 3;
    pub const COUNT: u16 = 4;
}

pub mod loader {
    pub const REQUEST: u16 = 0;
    pub const FILE_REPLY: u16 = 1;
    pub const OUT: u16 = 2;
    pub const COUNT: u16 = 3;
}

pub mod fileserver {
    pub const OUT: u16 = 0;
    pub const REQUEST: u16 = 1;
    pub const DATA: u16 = 2;
    pub const COUNT: u16 = 3;
}

pub mod scheduler {
    pub const START: u16 = 0;
    pub const QUERY: u16 = 1;
    pub const EXCEPTION: u16 = 2;
    pub const OUT: u16 = 3;
    pub const COUNT: u16 = 4;
}

fn first_node(core: u8, port: u16) -> PortId {
    PortId::new(false, FIRST_PROCESSOR, 0, core, port).expect("well-known port")
}

pub fn console_reserve() -> PortId {
    first_node(CONSOLE_CORE, console::RESERVE)
}

pub fn console_output() -> PortId {
    first_node(CONSOLE_CORE, console::OUTPUT)
}

pub fn console_launch() -> PortId {
    first_node(CONSOLE_CORE, console::LAUNCH)
}

pub fn dispatcher_start() -> PortId {
    first_node(DISPATCHER_CORE, dispatcher::START)
}

pub fn dispatcher_query() -> PortId {
    first_node(DISPATCHER_CORE, dispatcher::QUERY)
}

pub fn dispatcher_report() -> PortId {
    first_node(DISPATCHER_CORE, dispatcher::REPORT)
}

/// The loader's request port, the constant every program uses to start others.
pub fn port_loader() -> PortId {
    first_node(LOADER_CORE, loader::REQUEST)
}

pub fn loader_file_reply() -> PortId {
    first_node(LOADER_CORE, loader::FILE_REPLY)
}

pub fn fileserver_request() -> PortId {
    first_node(FILESERVER_CORE, fileserver::REQUEST)
}

pub fn fileserver_data() -> PortId {
    first_node(FILESERVER_CORE, fileserver::DATA)
}

pub fn scheduler_port(processor: u16, node: u8, port: u16) -> Option<PortId> {
    PortId::new(false, processor, node, SCHEDULER_CORE, port).ok()
}

/// Node index used by the inspection tools: 4 × processor + node.
pub fn node_index(processor: u16, node: u8) -> u32 {
    4 * processor as u32 + node as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addresses() {
        assert_eq!(port_loader().word(), 0x0008_1800);
        assert_eq!(console_output().word(), 0x0008_0802);
        assert_eq!(node_index(8, 1), 33);
    }
}
