use std::fmt;

/// One machine word. Text travels as one Unicode code point per word.
pub type Word = u32;

/// The channel alphabet.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Data(Word),
    /// Out-of-band end-of-message marker; closes the connection that carries it.
    End,
}

impl Token {
    pub fn is_end(self) -> bool {
        matches!(self, Token::End)
    }

    pub fn data(self) -> Option<Word> {
        match self {
            Token::Data(w) => Some(w),
            Token::End => None,
        }
    }
}

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Data(w) => write!(f, "{w:#x}"),
            Token::End => f.write_str("END"),
        }
    }
}

/// Encodes text as one word per code point.
pub fn text_words(s: &str) -> Vec<Word> {
    s.chars().map(|c| c as Word).collect()
}

/// Decodes words as code points; words that are not scalar values become U+FFFD.
pub fn words_text(words: &[Word]) -> String {
    words
        .iter()
        .map(|&w| char::from_u32(w).unwrap_or(char::REPLACEMENT_CHARACTER))
        .collect()
}
