//! Peripheral lines attached to the first processor: console input/output and
//! the external file service.

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use super::token::{text_words, words_text};
use super::Word;

/// What the console input line yields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsoleInput {
    Word(Word),
    Eof,
}

/// Host side of the console: queued input code points and collected output.
#[derive(Debug, Default)]
pub struct ConsoleLine {
    input: VecDeque<Word>,
    eof: bool,
    output: Vec<Word>,
    echo: bool,
}

impl ConsoleLine {
    pub fn push_input(&mut self, words: &[Word]) {
        self.input.extend(words);
    }

    pub fn push_eof(&mut self) {
        self.eof = true;
    }

    pub fn eof_pending(&self) -> bool {
        self.eof
    }

    pub fn input_pending(&self) -> usize {
        self.input.len()
    }

    pub(crate) fn read(&mut self) -> Option<ConsoleInput> {
        match self.input.pop_front() {
            Some(w) => {
                if self.echo {
                    self.output.push(w);
                }
                Some(ConsoleInput::Word(w))
            }
            None if self.eof => Some(ConsoleInput::Eof),
            None => None,
        }
    }

    pub(crate) fn write(&mut self, words: &[Word]) {
        self.output.extend_from_slice(words);
    }

    pub fn set_echo(&mut self, echo: bool) {
        self.echo = echo;
    }

    pub fn take_output(&mut self) -> Vec<Word> {
        std::mem::take(&mut self.output)
    }

    pub fn output(&self) -> &[Word] {
        &self.output
    }
}

/// Whole-file storage behind the file server.
pub trait FileStore {
    fn read(&self, name: &str) -> Option<Vec<Word>>;
    /// Creates or replaces the file; false on failure.
    fn write(&mut self, name: &str, words: &[Word]) -> bool;
}

/// In-memory store keeping words verbatim.
#[derive(Debug, Default, Clone)]
pub struct MemoryFiles {
    files: BTreeMap<String, Vec<Word>>,
}

impl MemoryFiles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_text(&mut self, name: &str, text: &str) {
        self.files.insert(name.to_string(), text_words(text));
    }

    pub fn get(&self, name: &str) -> Option<&[Word]> {
        self.files.get(name).map(Vec::as_slice)
    }
}

impl FileStore for MemoryFiles {
    fn read(&self, name: &str) -> Option<Vec<Word>> {
        self.files.get(name).cloned()
    }

    fn write(&mut self, name: &str, words: &[Word]) -> bool {
        self.files.insert(name.to_string(), words.to_vec());
        true
    }
}

/// Host directory store: UTF-8 on disk, one code point per word inside.
#[derive(Debug, Clone)]
pub struct HostDir {
    root: PathBuf,
}

impl HostDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        HostDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        let plain = !name.is_empty()
            && !name.contains(['/', '\\', '\0'])
            && name != "."
            && name != "..";
        plain.then(|| self.root.join(name))
    }
}

impl FileStore for HostDir {
    fn read(&self, name: &str) -> Option<Vec<Word>> {
        let bytes = fs::read(self.path(name)?).ok()?;
        Some(text_words(&String::from_utf8_lossy(&bytes)))
    }

    fn write(&mut self, name: &str, words: &[Word]) -> bool {
        match self.path(name) {
            Some(p) => fs::write(p, words_text(words)).is_ok(),
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn console_echo_and_eof() {
        let mut c = ConsoleLine::default();
        c.set_echo(true);
        c.push_input(&[0x61]);
        assert_eq!(c.read(), Some(ConsoleInput::Word(0x61)));
        assert_eq!(c.read(), None);
        c.push_eof();
        assert_eq!(c.read(), Some(ConsoleInput::Eof));
        assert_eq!(c.take_output(), vec![0x61]);
    }

    #[test]
    fn host_dir_rejects_paths() {
        let mut d = HostDir::new(std::env::temp_dir());
        assert!(!d.write("../x", &[0x41]));
        assert!(d.read("a/b").is_none());
    }
}
