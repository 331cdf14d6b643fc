//! Process runtime: behaviors, program manifests and registry, and the
//! per-node resource bookkeeping used by schedulers.

mod ledger;
mod mailbox;
mod manifest;
pub mod negotiate;
mod node;
mod process;
mod registry;

pub use ledger::{LedgerError, MemoryLedger, Region, USER_BASE, USER_END, USER_WORDS};
pub use mailbox::{Assembler, Outbox};
pub use manifest::{ManifestError, ProgramManifest, MAGIC};
pub use node::{NodeResources, ProcessRecord, SpawnError, USER_CORES};
pub use process::{AsAny, Behavior, Fault, Guard, GuardKind, Reason, Step, StepResult};
pub use registry::{Factory, Program, Registry, RegistryError};
