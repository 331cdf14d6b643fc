//! Per-node memory ledger over the user allocation area.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::fabric::Word;

/// First word of the user allocation area.
pub const USER_BASE: Word = 0x0101;
/// One past the last word of the user allocation area.
pub const USER_END: Word = 0x4000;
pub const USER_WORDS: Word = USER_END - USER_BASE;

/// A contiguous word range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub start: Word,
    pub len: Word,
}

impl Region {
    pub fn new(start: Word, len: Word) -> Self {
        Region { start, len }
    }

    pub fn end(&self) -> Word {
        self.start + self.len
    }

    /// Last word, inclusive.
    pub fn last(&self) -> Word {
        self.end() - 1
    }
}

/// Inclusive range display: `0101..01f0`.
impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04x}..{:04x}", self.start, self.last())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("no free region pair fits code {code:#x} and data {data:#x}")]
    NoFit { code: Word, data: Word },
    #[error("region sizes must be at least one word")]
    ZeroSize,
    #[error("region {0} was not allocated from this ledger")]
    NotAllocated(Region),
}

/// Free list of disjoint, sorted, coalesced regions plus the allocated set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryLedger {
    free: Vec<Region>,
    allocated: BTreeMap<Word, Word>,
}

impl Default for MemoryLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl MemoryLedger {
    pub fn new() -> Self {
        MemoryLedger { free: vec![Region::new(USER_BASE, USER_WORDS)], allocated: BTreeMap::new() }
    }

    /// An empty ledger with no free space at all.
    pub fn exhausted() -> Self {
        MemoryLedger { free: Vec::new(), allocated: BTreeMap::from([(USER_BASE, USER_WORDS)]) }
    }

    pub fn free_regions(&self) -> &[Region] {
        &self.free
    }

    pub fn free_words(&self) -> Word {
        self.free.iter().map(|r| r.len).sum()
    }

    pub fn allocated_words(&self) -> Word {
        self.allocated.values().sum()
    }

    fn take_first_fit(free: &mut Vec<Region>, len: Word) -> Option<Region> {
        let i = free.iter().position(|r| r.len >= len)?;
        let r = free[i];
        if r.len == len {
            free.remove(i);
        } else {
            free[i] = Region::new(r.start + len, r.len - len);
        }
        Some(Region::new(r.start, len))
    }

    /// Allocates code then data, each first-fit at the lowest address.
    /// On failure the ledger is unchanged.
    pub fn allocate_process_memory(&mut self, code_words: Word, data_words: Word) -> Result<(Region, Region), LedgerError> {
        if code_words == 0 || data_words == 0 {
            return Err(LedgerError::ZeroSize);
        }
        let mut free = self.free.clone();
        let fail = LedgerError::NoFit { code: code_words, data: data_words };
        let code = Self::take_first_fit(&mut free, code_words).ok_or(fail.clone())?;
        let data = Self::take_first_fit(&mut free, data_words).ok_or(fail)?;
        self.free = free;
        self.allocated.insert(code.start, code.len);
        self.allocated.insert(data.start, data.len);
        Ok((code, data))
    }

    pub fn free(&mut self, region: Region) -> Result<(), LedgerError> {
        if self.allocated.get(&region.start) != Some(&region.len) {
            return Err(LedgerError::NotAllocated(region));
        }
        self.allocated.remove(&region.start);
        let i = self.free.partition_point(|r| r.start < region.start);
        self.free.insert(i, region);
        // merge with the right neighbour, then the left one
        if i + 1 < self.free.len() && self.free[i].end() == self.free[i + 1].start {
            self.free[i].len += self.free[i + 1].len;
            self.free.remove(i + 1);
        }
        if i > 0 && self.free[i - 1].end() == self.free[i].start {
            self.free[i - 1].len += self.free[i].len;
            self.free.remove(i);
        }
        Ok(())
    }

    pub fn free_process_memory(&mut self, code: Region, data: Region) -> Result<(), LedgerError> {
        self.free(code)?;
        self.free(data)
    }

    /// Lengths of the two largest free regions; missing regions count as 0.
    pub fn two_largest(&self) -> (Word, Word) {
        let mut best = (0, 0);
        for r in &self.free {
            if r.len > best.0 {
                best = (r.len, best.0);
            } else if r.len > best.1 {
                best.1 = r.len;
            }
        }
        best
    }

    /// Checks disjointness, ordering, coalescing, bounds and conservation.
    pub fn check(&self) -> Result<(), String> {
        for w in self.free.windows(2) {
            if w[0].end() >= w[1].start {
                return Err(format!("free regions {} and {} overlap or touch", w[0], w[1]));
            }
        }
        for r in &self.free {
            if r.len == 0 || r.start < USER_BASE || r.end() > USER_END {
                return Err(format!("free region {r} out of bounds"));
            }
        }
        if self.free_words() + self.allocated_words() != USER_WORDS {
            return Err("free + allocated does not cover the user area".into());
        }
        Ok(())
    }
}
