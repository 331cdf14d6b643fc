//! User programs: the shell and the standard tool set.

mod files;
mod inspect;
mod shell;
pub mod text;
mod tool;
mod tools;
pub mod wiring;

use std::collections::BTreeMap;

pub use files::{Fread, Fwrite};
pub use inspect::{node_of_dimension, Qdisp, Qsched};
pub use shell::{Shell, ShellStats, FAULT, NAME_CAPACITY, PROMPT, STACK_CAPACITY, STOP};
pub use tool::{Body, Tool, FIRST_DATA_PORT};
pub use tools::{Absorb, Buf, Concat, Dup, Hello, Merge, Nil, Parafill, Upper, HELLO_TEXT};

use crate::fabric::{text_words, Word};
use crate::runtime::{Behavior, ProgramManifest, Registry};

/// Program name of the shell; its executable is also installed as `init.nop`.
pub const SHELL: &str = "ulsh";

/// Sizes of the standard programs: name, code words, static data words,
/// data words per dimension.
pub const STANDARD_SIZES: &[(&str, Word, Word, Word)] = &[
    (SHELL, 0xf0, 0x1d7, 0),
    ("upper", 0x40, 0x10, 0),
    ("parafill", 0x60, 0x20, 1),
    ("concat", 0x40, 0x10, 0),
    ("dup", 0x40, 0x10, 0),
    ("buf", 0x40, 0x10, 1),
    ("merge", 0x50, 0x10, 0),
    ("nil", 0x10, 0x4, 0),
    ("absorb", 0x10, 0x4, 0),
    ("hello", 0x30, 0x10, 0),
    ("fread", 0x60, 0x20, 0),
    ("fwrite", 0x70, 0x20, 0),
    ("qdisp", 0x80, 0x100, 0),
    ("qsched", 0x90, 0x123, 0),
];

fn tool<B: Body>(body: B) -> Box<dyn Behavior> {
    Box::new(Tool::new(body))
}

fn factory(name: &str, dimension: Word) -> Box<dyn Behavior> {
    match name {
        SHELL => Box::new(Shell::new()),
        "upper" => tool(Upper),
        "parafill" => tool(Parafill::new(dimension)),
        "concat" => tool(Concat::default()),
        "dup" => tool(Dup),
        "buf" => tool(Buf::new(dimension)),
        "merge" => tool(Merge::default()),
        "nil" => tool(Nil),
        "absorb" => tool(Absorb::default()),
        "hello" => tool(Hello),
        "fread" => tool(Fread::default()),
        "fwrite" => tool(Fwrite::default()),
        "qdisp" => tool(Qdisp::default()),
        "qsched" => tool(Qsched::new(dimension)),
        _ => unreachable!("unknown standard program {name}"),
    }
}

pub fn standard_manifests() -> Vec<ProgramManifest> {
    STANDARD_SIZES
        .iter()
        .map(|&(name, code, data, perdim)| ProgramManifest::new(name, code, data, perdim).expect("valid standard manifest"))
        .collect()
}

/// A registry holding the shell and every standard tool.
pub fn standard_registry() -> Registry {
    let mut r = Registry::new();
    for m in standard_manifests() {
        let name = m.name.clone();
        let key: &'static str = STANDARD_SIZES.iter().find(|s| s.0 == name).map(|s| s.0).unwrap();
        r.register_program(&name, m, move |d| factory(key, d)).expect("unique standard names");
    }
    r
}

/// Executable files for the standard programs, keyed by file name.
/// The shell is present both as `ulsh.nop` and as `init.nop`.
pub fn standard_files() -> BTreeMap<String, Vec<Word>> {
    let mut files = BTreeMap::new();
    for m in standard_manifests() {
        let text = text_words(&m.to_text());
        if m.name == SHELL {
            files.insert(crate::bootsys::DEFAULT_INIT.to_string(), text.clone());
        }
        files.insert(format!("{}.nop", m.name), text);
    }
    files
}
