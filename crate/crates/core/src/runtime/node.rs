//! Node-local resource bookkeeping: which cores run what, and the memory ledger.

use thiserror::Error;

use super::{LedgerError, MemoryLedger, ProgramManifest, Region};
use crate::fabric::port::CORES_PER_NODE;
use crate::fabric::{PortId, Word};

/// Cores available to user processes; core 0 runs the scheduler.
pub const USER_CORES: std::ops::Range<u8> = 1..CORES_PER_NODE as u8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessRecord {
    pub program: String,
    pub core: u8,
    pub code: Region,
    pub data: Region,
    pub dimension: Word,
    pub requester: PortId,
    /// Control port of the started process, filled in once it runs.
    pub control: Option<PortId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpawnError {
    #[error("no free core")]
    NoCore,
    #[error("data size overflows for dimension {0}")]
    Dimension(Word),
    #[error(transparent)]
    Memory(#[from] LedgerError),
    #[error("core {0} holds no process")]
    NotRunning(u8),
}

#[derive(Debug, Clone, Default)]
pub struct NodeResources {
    ledger: MemoryLedger,
    cores: [Option<ProcessRecord>; CORES_PER_NODE],
}

impl NodeResources {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ledger(&self) -> &MemoryLedger {
        &self.ledger
    }

    pub fn record(&self, core: u8) -> Option<&ProcessRecord> {
        self.cores.get(core as usize)?.as_ref()
    }

    pub fn record_mut(&mut self, core: u8) -> Option<&mut ProcessRecord> {
        self.cores.get_mut(core as usize)?.as_mut()
    }

    pub fn cores_free(&self) -> u8 {
        USER_CORES.clone().filter(|&c| self.cores[c as usize].is_none()).count() as u8
    }

    pub fn two_largest(&self) -> (Word, Word) {
        self.ledger.two_largest()
    }

    /// Reserves a core and memory for a program. The caller starts the
    /// behavior on the returned core.
    pub fn spawn(&mut self, manifest: &ProgramManifest, dimension: Word, requester: PortId) -> Result<&ProcessRecord, SpawnError> {
        let data_words = manifest.data_words(dimension).ok_or(SpawnError::Dimension(dimension))?;
        self.reserve(&manifest.name, manifest.code_words, data_words, dimension, requester)
    }

    /// Like [`spawn`](Self::spawn) with the data size already computed.
    pub fn reserve(&mut self, program: &str, code_words: Word, data_words: Word, dimension: Word, requester: PortId) -> Result<&ProcessRecord, SpawnError> {
        let core = USER_CORES.clone().find(|&c| self.cores[c as usize].is_none()).ok_or(SpawnError::NoCore)?;
        let (code, data) = self.ledger.allocate_process_memory(code_words, data_words)?;
        let slot = &mut self.cores[core as usize];
        Ok(slot.insert(ProcessRecord {
            program: program.to_string(),
            core,
            code,
            data,
            dimension,
            requester,
            control: None,
        }))
    }

    /// Releases the core and memory of a terminated process.
    pub fn terminate(&mut self, core: u8) -> Result<ProcessRecord, SpawnError> {
        let rec = self.cores.get_mut(core as usize).and_then(Option::take).ok_or(SpawnError::NotRunning(core))?;
        self.ledger.free_process_memory(rec.code, rec.data)?;
        Ok(rec)
    }
}
