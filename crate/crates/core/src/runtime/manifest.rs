//! Executable manifests (`.nop` files).
//!
//! ```text
//! NOP1
//! name upper
//! code f0
//! data 40
//! perdim 0
//! ```
//!
//! Sizes are hexadecimal word counts.

use std::fmt;

use thiserror::Error;

use crate::fabric::Word;

pub const MAGIC: &str = "NOP1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("missing or wrong magic line")]
    Magic,
    #[error("line {0}: expected `{1} <value>`")]
    Field(usize, &'static str),
    #[error("line {0}: bad hex number {1:?}")]
    Number(usize, String),
    #[error("program name must be non-empty and free of whitespace")]
    Name,
    #[error("code size must be at least one word")]
    EmptyCode,
    #[error("unexpected trailing content at line {0}")]
    Trailing(usize),
}

/// Executable-file content: everything the system needs to size a process.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProgramManifest {
    pub name: String,
    pub code_words: Word,
    pub static_data_words: Word,
    pub words_per_dimension: Word,
}

impl ProgramManifest {
    pub fn new(
        name: &str,
        code_words: Word,
        static_data_words: Word,
        words_per_dimension: Word,
    ) -> Result<Self, ManifestError> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(ManifestError::Name);
        }
        if code_words == 0 {
            return Err(ManifestError::EmptyCode);
        }
        Ok(ProgramManifest { name: name.to_string(), code_words, static_data_words, words_per_dimension })
    }

    /// Absolute data demand for a dimension; `None` on overflow.
    pub fn data_words(&self, dimension: Word) -> Option<Word> {
        self.words_per_dimension
            .checked_mul(dimension)
            .and_then(|d| d.checked_add(self.static_data_words))
    }

    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        match lines.next() {
            Some((_, MAGIC)) => {}
            _ => return Err(ManifestError::Magic),
        }
        let mut field = |key: &'static str| -> Result<(usize, String), ManifestError> {
            let (n, line) = lines.next().ok_or(ManifestError::Field(0, key))?;
            match line.split_once(' ') {
                Some((k, v)) if k == key && !v.is_empty() => Ok((n, v.to_string())),
                _ => Err(ManifestError::Field(n, key)),
            }
        };
        let (_, name) = field("name")?;
        let hex = |(n, v): (usize, String)| Word::from_str_radix(&v, 16).map_err(|_| ManifestError::Number(n, v));
        let code = hex(field("code")?)?;
        let data = hex(field("data")?)?;
        let perdim = hex(field("perdim")?)?;
        if let Some((n, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            let _ = l;
            return Err(ManifestError::Trailing(n));
        }
        ProgramManifest::new(&name, code, data, perdim)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ProgramManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{MAGIC}\nname {}\ncode {:x}\ndata {:x}\nperdim {:x}\n",
            self.name, self.code_words, self.static_data_words, self.words_per_dimension
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_format_instance() {
        let m = ProgramManifest::parse("NOP1\nname upper\ncode f0\ndata 40\nperdim 0\n").unwrap();
        assert_eq!(m, ProgramManifest::new("upper", 0xF0, 0x40, 0).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(ProgramManifest::parse("NOP2\n"), Err(ManifestError::Magic));
        assert_eq!(ProgramManifest::parse("NOP1\nname x\ncode 0\ndata 1\nperdim 0\n"), Err(ManifestError::EmptyCode));
        assert!(matches!(ProgramManifest::parse("NOP1\nname x\ncode zz\ndata 1\nperdim 0\n"), Err(ManifestError::Number(3, _))));
        assert!(matches!(ProgramManifest::parse("NOP1\nname x\ndata 1\n"), Err(ManifestError::Field(3, "code"))));
        assert!(matches!(ProgramManifest::parse("NOP1\nname x\ncode 1\ndata 1\nperdim 0\nmore\n"), Err(ManifestError::Trailing(6))));
    }

    #[test]
    fn data_formula() {
        let m = ProgramManifest::new("buf", 0x20, 0x10, 1).unwrap();
        assert_eq!(m.data_words(0), Some(0x10));
        assert_eq!(m.data_words(20), Some(0x10 + 20));
        assert_eq!(ProgramManifest::new("x", 1, 1, Word::MAX).unwrap().data_words(2), None);
    }

    proptest! {
        #[test]
        fn text_roundtrip(name in "[a-z][a-z0-9_.]{0,15}", code in 1u32.., data: u32, perdim: u32) {
            let m = ProgramManifest::new(&name, code, data, perdim).unwrap();
            prop_assert_eq!(ProgramManifest::parse(&m.to_text()).unwrap(), m);
        }

        #[test]
        fn data_monotone(s in 0u32..0x1000, p in 0u32..0x100, a in 0u32..0x1000, b in 0u32..0x1000) {
            let m = ProgramManifest::new("t", 1, s, p).unwrap();
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(m.data_words(lo).unwrap() <= m.data_words(hi).unwrap());
        }
    }
}
