//! Program registry: resolves program names to host-coded behaviors.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::{Behavior, ProgramManifest};
use crate::fabric::Word;

pub type Factory = Box<dyn Fn(Word) -> Box<dyn Behavior> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("program {0:?} registered twice")]
    Duplicate(String),
    #[error("manifest names {1:?} but is registered as {0:?}")]
    NameMismatch(String, String),
}

pub struct Program {
    pub manifest: ProgramManifest,
    factory: Factory,
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Program").field("manifest", &self.manifest).finish()
    }
}

#[derive(Debug, Default)]
pub struct Registry {
    programs: BTreeMap<String, Program>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_program(
        &mut self,
        name: &str,
        manifest: ProgramManifest,
        factory: impl Fn(Word) -> Box<dyn Behavior> + Send + Sync + 'static,
    ) -> Result<(), RegistryError> {
        if manifest.name != name {
            return Err(RegistryError::NameMismatch(name.to_string(), manifest.name));
        }
        if self.programs.contains_key(name) {
            return Err(RegistryError::Duplicate(name.to_string()));
        }
        self.programs.insert(name.to_string(), Program { manifest, factory: Box::new(factory) });
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.programs.contains_key(name)
    }

    pub fn manifest(&self, name: &str) -> Option<&ProgramManifest> {
        self.programs.get(name).map(|p| &p.manifest)
    }

    pub fn instantiate(&self, name: &str, dimension: Word) -> Option<Box<dyn Behavior>> {
        self.programs.get(name).map(|p| (p.factory)(dimension))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.programs.keys().map(String::as_str)
    }
}
