//! Reference replay of a shell command line on an abstract port stack.
//!
//! Used as an oracle for the shell: it describes where every output,
//! string and the following console line ends up, without running
//! anything.

use crate::fabric::Word;

use super::shell::{NAME_CAPACITY, STACK_CAPACITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    /// The shell's own output, i.e. the console.
    Console,
    /// Input port number `index` (announcement order) of command `command`.
    Input { command: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Started {
    pub name: String,
    pub dimension: Word,
    pub outputs: Vec<Endpoint>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Replay {
    pub commands: Vec<Started>,
    /// Quoted strings and where they were sent. A string still open at the
    /// end of the line includes the newline.
    pub strings: Vec<(String, Endpoint)>,
    /// Receives the next console line.
    pub console_line: Option<Endpoint>,
    /// Ports closed with an empty stream, in closing order.
    pub closed: Vec<Endpoint>,
    pub fault: bool,
    /// The line ended inside a string.
    pub open_string: bool,
}

/// Replays one line (without its newline). `signature` maps a command name
/// and dimension to (outputs, inputs), or `None` if it cannot be started.
pub fn replay(line: &str, signature: impl Fn(&str, Word) -> Option<(usize, usize)>) -> Replay {
    let mut r = Replay::default();
    let mut stack: Vec<Endpoint> = Vec::new();
    let chars: Vec<char> = line.chars().chain(std::iter::once('\n')).collect();
    let mut i = 0;
    let blank = |c: char| c <= ' ';

    let fault = |r: &mut Replay, stack: &mut Vec<Endpoint>| {
        r.fault = true;
        r.closed.extend(stack.drain(..).rev());
    };

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            if let Some(top) = stack.pop() {
                r.console_line = Some(top);
                r.closed.extend(stack.drain(..).rev());
            }
            return r;
        }
        if blank(c) {
            i += 1;
            continue;
        }
        if c == '"' {
            let target = stack.pop().unwrap_or(Endpoint::Console);
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => {
                        r.strings.push((s, target));
                        r.open_string = true;
                        r.closed.extend(stack.drain(..).rev());
                        return r;
                    }
                    Some('"') if chars.get(i + 1) == Some(&'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            r.strings.push((s, target));
            // the character after the closing quote only separates
            if chars.get(i) == Some(&'\n') {
                continue;
            }
            i += 1;
            continue;
        }

        let start = i;
        while i < chars.len() && !blank(chars[i]) && chars[i] != ':' {
            i += 1;
        }
        let name: String = chars[start..i].iter().collect();
        if name.chars().count() > NAME_CAPACITY {
            fault(&mut r, &mut stack);
            return r;
        }
        let mut dimension: Word = 0;
        if chars[i] == ':' {
            i += 1;
            while !blank(chars[i]) {
                let d = chars[i].to_digit(10);
                match d.and_then(|d| dimension.checked_mul(10)?.checked_add(d)) {
                    Some(v) => dimension = v,
                    None => {
                        fault(&mut r, &mut stack);
                        return r;
                    }
                }
                i += 1;
            }
        }
        let Some((outs, ins)) = signature(&name, dimension) else {
            fault(&mut r, &mut stack);
            return r;
        };
        let command = r.commands.len();
        let outputs = (0..outs).map(|_| stack.pop().unwrap_or(Endpoint::Console)).collect();
        r.commands.push(Started { name, dimension, outputs });
        for index in 0..ins {
            if stack.len() < STACK_CAPACITY {
                stack.push(Endpoint::Input { command, index });
            }
        }
        if stack.len() >= STACK_CAPACITY {
            fault(&mut r, &mut stack);
            return r;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use Endpoint::*;

    fn sig(name: &str, _d: Word) -> Option<(usize, usize)> {
        Some(match name {
            "upper" | "parafill" | "fread" => (1, 1),
            "fwrite" => (0, 2),
            "dup" => (2, 1),
            "concat" => (1, 2),
            "hello" => (1, 0),
            _ => return None,
        })
    }

    #[test]
    fn example_pipeline() {
        let r = replay(r#"upper fwrite "doc.text" dup parafill:20 concat hello fread "fox.text""#, sig);
        assert!(!r.fault);
        let outs: Vec<_> = r.commands.iter().map(|c| (c.name.as_str(), c.outputs.clone())).collect();
        assert_eq!(
            outs,
            vec![
                ("upper", vec![Console]),
                ("fwrite", vec![]),
                ("dup", vec![Input { command: 1, index: 0 }, Input { command: 0, index: 0 }]),
                ("parafill", vec![Input { command: 2, index: 0 }]),
                ("concat", vec![Input { command: 3, index: 0 }]),
                ("hello", vec![Input { command: 4, index: 1 }]),
                ("fread", vec![Input { command: 4, index: 0 }]),
            ]
        );
        assert_eq!(r.commands[3].dimension, 20);
        assert_eq!(
            r.strings,
            vec![("doc.text".into(), Input { command: 1, index: 1 }), ("fox.text".into(), Input { command: 6, index: 0 })]
        );
        assert_eq!(r.console_line, None);
        assert!(r.closed.is_empty());
    }

    #[test]
    fn leftovers_and_faults() {
        let r = replay("concat", sig);
        assert_eq!(r.console_line, Some(Input { command: 0, index: 1 }));
        assert_eq!(r.closed, vec![Input { command: 0, index: 0 }]);

        let r = replay("concat bogus hello", sig);
        assert!(r.fault);
        assert_eq!(r.commands.len(), 1);
        assert_eq!(r.closed.len(), 2);

        let r = replay("hello:1x", sig);
        assert!(r.fault && r.commands.is_empty());
    }

    #[test]
    fn quoting() {
        let r = replay(r#""a""b"x"c""#, sig);
        assert_eq!(r.strings, vec![("a\"b".into(), Console), ("c".into(), Console)]);
        let r = replay(r#""open"#, sig);
        assert!(r.open_string);
        assert_eq!(r.strings, vec![("open\n".into(), Console)]);
    }
}
