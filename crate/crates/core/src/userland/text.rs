//! Word-stream transformations shared by the tools and their tests.

use crate::fabric::Word;

const SPACE: Word = ' ' as Word;
const NEWLINE: Word = '\n' as Word;

pub fn upper_word(w: Word) -> Word {
    if ('a' as Word..='z' as Word).contains(&w) {
        w - 0x20
    } else {
        w
    }
}

pub fn upper(words: &[Word]) -> Vec<Word> {
    words.iter().map(|&w| upper_word(w)).collect()
}

pub fn is_blank(w: Word) -> bool {
    w == SPACE || w == NEWLINE
}

/// Streaming greedy line filler. Tokens are maximal runs of non-blank
/// words; a token longer than the width sits alone on its line.
#[derive(Debug, Clone)]
pub struct Filler {
    width: usize,
    line: usize,
    token: Vec<Word>,
    emitted: bool,
}

impl Filler {
    pub fn new(width: usize) -> Self {
        Filler { width: width.max(1), line: 0, token: Vec::new(), emitted: false }
    }

    /// Feeds one word; appends any output to `out`.
    pub fn feed(&mut self, w: Word, out: &mut Vec<Word>) {
        if is_blank(w) {
            self.flush_token(out);
        } else {
            self.token.push(w);
        }
    }

    fn flush_token(&mut self, out: &mut Vec<Word>) {
        if self.token.is_empty() {
            return;
        }
        let len = self.token.len();
        if self.line == 0 {
            self.line = len;
        } else if self.line + 1 + len <= self.width {
            out.push(SPACE);
            self.line += 1 + len;
        } else {
            out.push(NEWLINE);
            self.line = len;
        }
        out.append(&mut self.token);
        self.emitted = true;
    }

    /// Ends the stream: the last token and a closing newline.
    pub fn finish(&mut self, out: &mut Vec<Word>) {
        self.flush_token(out);
        if self.emitted {
            out.push(NEWLINE);
        }
        self.line = 0;
        self.emitted = false;
    }
}

pub fn parafill(width: usize, words: &[Word]) -> Vec<Word> {
    let mut f = Filler::new(width);
    let mut out = Vec::new();
    for &w in words {
        f.feed(w, &mut out);
    }
    f.finish(&mut out);
    out
}

/// Splits a stream at newlines, keeping each newline with its line.
pub fn lines(words: &[Word]) -> Vec<Vec<Word>> {
    let mut v = Vec::new();
    let mut cur = Vec::new();
    for &w in words {
        cur.push(w);
        if w == NEWLINE {
            v.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        v.push(cur);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabric::{text_words, words_text};

    fn fill(n: usize, s: &str) -> String {
        words_text(&parafill(n, &text_words(s)))
    }

    #[test]
    fn upper_maps_only_ascii_lowercase() {
        assert_eq!(words_text(&upper(&text_words("Dog."))), "DOG.");
        assert_eq!(upper_word(0xDF), 0xDF);
        assert_eq!(upper_word('{' as Word), '{' as Word);
    }

    #[test]
    fn fills_the_example() {
        let out = fill(20, "Hello World\nThe quick brown fox jumps over the lazy dog.");
        assert_eq!(out, "Hello World The\nquick brown fox\njumps over the lazy\ndog.\n");
    }

    #[test]
    fn long_tokens_stand_alone() {
        assert_eq!(fill(3, "ab abcdef c"), "ab\nabcdef\nc\n");
        assert_eq!(fill(5, ""), "");
        assert_eq!(fill(5, "  \n "), "");
    }

    #[test]
    fn line_split() {
        let l = lines(&text_words("a\nbc\nd"));
        assert_eq!(l.len(), 3);
        assert_eq!(words_text(&l[1]), "bc\n");
    }
}
