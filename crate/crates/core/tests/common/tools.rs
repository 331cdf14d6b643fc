//! Tool properties, each checked against a reference model.

use nopsys::fabric::{text_words, words_text, Word};
use nopsys::runtime::Behavior;
use nopsys::userland::text::{lines, upper};
use nopsys::userland::{Body, Buf, Concat, Dup, Merge, Parafill, Tool, Upper};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::{bench, Feed};

pub fn tool<B: Body>(b: B) -> Box<dyn Behavior> {
    Box::new(Tool::new(b))
}

pub fn stream() -> impl Strategy<Value = Vec<Word>> {
    prop::collection::vec(prop_oneof![4 => 0x20u32..0x7f, 1 => Just(0x0a), 1 => any::<u32>()], 0..60)
}

pub fn prose() -> impl Strategy<Value = String> {
    prop::collection::vec(prop_oneof![6 => "[a-zA-Z.,]{1,12}", 2 => " {1,3}", 1 => "\n"], 0..30).prop_map(|parts| parts.concat())
}

/// Lines drawn from one alphabet, each ending with a newline.
pub fn tagged_lines(alphabet: &'static str) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(proptest::string::string_regex(&format!("[{alphabet}]{{0,6}}")).unwrap().prop_map(|s| s + "\n"), 0..8)
}

fn run1(b: Box<dyn Behavior>, input: Vec<Word>) -> Vec<Word> {
    bench(b, &[Feed::new(input)], 1, 0).outputs.remove(0)
}

pub fn upper_idempotent(input: Vec<Word>) -> Result<(), TestCaseError> {
    let once = run1(tool(Upper), input.clone());
    prop_assert_eq!(&once, &upper(&input));
    let twice = run1(tool(Upper), once.clone());
    prop_assert_eq!(twice, once);
    Ok(())
}

pub fn parafill_bounded(text: String, width: u32) -> Result<(), TestCaseError> {
    let out = words_text(&run1(tool(Parafill::new(width)), text_words(&text)));
    for line in out.lines() {
        let n = line.chars().count();
        prop_assert!(n <= width as usize || !line.contains(' '), "line {:?} longer than {}", line, width);
    }
    let words_in: Vec<&str> = text.split_whitespace().collect();
    let words_out: Vec<&str> = out.split_whitespace().collect();
    prop_assert_eq!(words_in, words_out);
    prop_assert!(out.is_empty() || out.ends_with('\n'));
    Ok(())
}

pub fn dup_equal(input: Vec<Word>) -> Result<(), TestCaseError> {
    let r = bench(tool(Dup), &[Feed::new(input.clone())], 2, 0);
    prop_assert_eq!(&r.outputs[0], &input);
    prop_assert_eq!(&r.outputs[1], &input);
    Ok(())
}

pub fn concat_appends(a: Vec<Word>, b: Vec<Word>, pa: u32, pb: u32) -> Result<(), TestCaseError> {
    // announced as [second, first]
    let feeds = [Feed { words: b.clone(), pace: pb }, Feed { words: a.clone(), pace: pa }];
    let out = bench(tool(Concat::default()), &feeds, 1, 0).outputs.remove(0);
    let mut expected = a;
    expected.extend(b);
    prop_assert_eq!(out, expected);
    Ok(())
}

pub fn buf_ordered(input: Vec<Word>, cap: u32, pace: u32) -> Result<(), TestCaseError> {
    let r = bench(tool(Buf::new(cap)), &[Feed::new(input.clone())], 1, pace);
    prop_assert_eq!(&r.outputs[0], &input);
    Ok(())
}

pub fn merge_preserves(a: Vec<String>, b: Vec<String>, pa: u32, pb: u32) -> Result<(), TestCaseError> {
    let feeds = [Feed { words: text_words(&b.concat()), pace: pb }, Feed { words: text_words(&a.concat()), pace: pa }];
    let out = bench(tool(Merge::default()), &feeds, 1, 0).outputs.remove(0);
    let out_lines: Vec<String> = lines(&out).iter().map(|l| words_text(l)).collect();
    prop_assert_eq!(out_lines.len(), a.len() + b.len());
    let from = |alpha: fn(char) -> bool| -> Vec<String> { out_lines.iter().filter(|l| l.chars().next().is_some_and(alpha)).cloned().collect() };
    let nonblank = |v: &[String]| -> Vec<String> { v.iter().filter(|l| l.as_str() != "\n").cloned().collect() };
    let blanks = |v: &[String]| v.iter().filter(|l| l.as_str() == "\n").count();
    prop_assert_eq!(from(|c| ('a'..='m').contains(&c)), nonblank(&a));
    prop_assert_eq!(from(|c| ('n'..='z').contains(&c)), nonblank(&b));
    prop_assert_eq!(blanks(&out_lines), blanks(&a) + blanks(&b));
    Ok(())
}
