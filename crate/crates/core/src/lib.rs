//! A message-passing multiprocessor operating system running on a
//! deterministic simulated fabric of processors, nodes and cores.

pub mod bootsys;
pub mod fabric;
pub mod kernel;
pub mod runtime;
pub mod system;
pub mod userland;
