use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_nopsys");
const PIPELINE: &str = r#"upper fwrite "doc.text" dup parafill:20 concat hello fread "fox.text""#;

fn setup(config: &str, script: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("files")).unwrap();
    std::fs::write(dir.path().join("files/fox.text"), "The quick brown fox jumps over the lazy dog.").unwrap();
    std::fs::write(dir.path().join("sys.cfg"), config).unwrap();
    std::fs::write(dir.path().join("script"), script).unwrap();
    dir
}

fn run(dir: &Path, extra: &[&str]) -> Output {
    Command::new(BIN)
        .arg("run")
        .arg(dir.join("sys.cfg"))
        .arg("--script")
        .arg(dir.join("script"))
        .args(extra)
        .output()
        .unwrap()
}

fn numbers(stderr: &str) -> Vec<String> {
    stderr.lines().filter(|l| l.starts_with("instance ")).map(str::to_string).collect()
}

#[test]
fn torus_transcript() {
    let dir = setup("files files\n", &format!("{PIPELINE}\n"));
    let out = run(dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout, "> HELLO WORLD THE\nQUICK BROWN FOX\nJUMPS OVER THE LAZY\nDOG.\n> stop\n");
    let doc = std::fs::read_to_string(dir.path().join("files/doc.text")).unwrap();
    assert_eq!(doc, "Hello World The\nquick brown fox\njumps over the lazy\ndog.\n");
}

#[test]
fn single_processor_stops_at_end_of_input() {
    let dir = setup("processors 1\n", "");
    let out = run(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "> stop\n");
}

#[test]
fn error_statuses_are_distinct() {
    let dir = setup("processors 2\nlink 0 0 1\n", "");
    assert_eq!(run(dir.path(), &[]).status.code(), Some(3));

    let dir = setup("bootrom missing.rom\n", "");
    assert_eq!(run(dir.path(), &[]).status.code(), Some(4));

    let dir = setup("bootrom boot.rom\n", "");
    std::fs::write(dir.path().join("boot.rom"), "NOPBOOT1\ninit nothing.nop\n").unwrap();
    assert_eq!(run(dir.path(), &[]).status.code(), Some(4));

    let dir = setup("processors 1\n", "");
    assert_eq!(run(dir.path(), &["--max-ticks", "50"]).status.code(), Some(5));

    let dir = setup("processors 1\nsocket 0 0\n", "");
    assert_eq!(run(dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn runs_are_deterministic() {
    let dir = setup("files files\n", &format!("{PIPELINE}\nqdisp\nqsched:33\n"));
    let a = run(dir.path(), &["--summary", "--trace"]);
    let b = run(dir.path(), &["--summary", "--trace"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn socket_link_matches_in_process_numbering() {
    let reference = setup("processors 2\nlink 0 0 1 0\n", "");
    let out = run(reference.path(), &["--summary"]);
    let expected = numbers(&String::from_utf8_lossy(&out.stderr));
    assert_eq!(expected, ["instance 0 number 8", "instance 1 number 9"]);

    let first = setup("processors 1\nsocket 0 0\n", "");
    let second = setup("processors 1\nsocket 0 0\nsecondary\n", "");
    let mut a = Command::new(BIN)
        .arg("run")
        .arg(first.path().join("sys.cfg"))
        .arg("--script")
        .arg(first.path().join("script"))
        .args(["--listen", "127.0.0.1:0", "--summary"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut a_err = BufReader::new(a.stderr.take().unwrap());
    let mut line = String::new();
    a_err.read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").expect("listen address").to_string();
    let b = Command::new(BIN)
        .arg("run")
        .arg(second.path().join("sys.cfg"))
        .args(["--connect", &addr, "--summary"])
        .output()
        .unwrap();
    let mut rest = String::new();
    for l in a_err.lines() {
        rest.push_str(&l.unwrap());
        rest.push('\n');
    }
    assert!(a.wait().unwrap().success());
    assert!(b.status.success());
    let mut got = numbers(&rest);
    got.extend(numbers(&String::from_utf8_lossy(&b.stderr)).iter().map(|l| l.replace("instance 0", "instance 1")));
    assert_eq!(got, expected);
}
