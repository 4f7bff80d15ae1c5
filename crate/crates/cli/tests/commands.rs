use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use hamstream_cli::{parse_line, Alphabet};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hamstream"));
    c.env_remove("HAMSTREAM_SEED");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hamstream-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, data: &[u8]) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, data).unwrap();
    p
}

fn run(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    // the child may exit before reading its input
    let _ = input.write_all(stdin.unwrap_or(b""));
    drop(input);
    child.wait_with_output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn match_examples() {
    let p = write("abc", b"abc");
    let t = write("abcabc", b"abcabc");
    let out = run(&["match", "-p", s(&p), "-t", s(&t), "-k", "0"], None);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0\t0\t\n3\t0\t\n");
    let out = run(&["match", "-p", s(&p), "-k", "1"], Some(b"abd"));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0\t1\t2:c>d\n");
    let line = "0\t1\t2:c>d";
    let parsed = parse_line(line, Alphabet::Bytes).unwrap();
    assert_eq!((parsed.start, parsed.mismatches[0].a, parsed.mismatches[0].b), (0, b'c' as u64, b'd' as u64));
}

#[test]
fn match_equals_oracle_and_is_deterministic() {
    let pat: Vec<u8> = (0..300u32).map(|i| b"acgt"[(i * i % 7 % 4) as usize]).collect();
    let mut txt = Vec::new();
    for rep in 0..6u8 {
        txt.extend_from_slice(&pat);
        let at = txt.len() - 50;
        txt[at] = b'x' + rep % 2;
        txt.extend_from_slice(b"gattaca");
    }
    let p = write("dna-p", &pat);
    let t = write("dna-t", &txt);
    for k in ["0", "1", "3"] {
        let a = run(&["match", "-p", s(&p), "-t", s(&t), "-k", k, "--seed", "7"], None);
        let b = run(&["oracle", "-p", s(&p), "-t", s(&t), "-k", k], None);
        let c = run(&["match", "-p", s(&p), "-t", s(&t), "-k", k, "--seed", "7"], None);
        assert!(a.status.success() && b.status.success());
        assert_eq!(a.stdout, b.stdout, "k = {k}");
        assert_eq!(a.stdout, c.stdout);
        // a Mersenne prime has almost no room for transforms
        let m = run(&["match", "-p", s(&p), "-t", s(&t), "-k", k, "--prime", "2305843009213693951"], None);
        assert_eq!(m.stdout, b.stdout);
    }
    let mut env_run = bin();
    env_run.env("HAMSTREAM_SEED", "99").args(["match", "-p", s(&p), "-t", s(&t), "-k", "2"]);
    let out = env_run.output().unwrap();
    assert_eq!(out.stdout, run(&["oracle", "-p", s(&p), "-t", s(&t), "-k", "2"], None).stdout);
}

#[test]
fn token_mode_reads_little_endian_words() {
    let words = |v: &[u32]| v.iter().flat_map(|w| w.to_le_bytes()).collect::<Vec<u8>>();
    let p = write("tok-p", &words(&[70000, 5, 70000]));
    let t = write("tok-t", &words(&[1, 70000, 5, 70001, 70000, 5, 70000]));
    let out = run(&["match", "--tokens", "-p", s(&p), "-t", s(&t), "-k", "1"], None);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1\t1\t2:70000>70001\n4\t0\t\n");
    let bad = write("tok-bad", &[1, 2, 3]);
    assert_eq!(run(&["match", "--tokens", "-p", s(&p), "-t", s(&bad), "-k", "1"], None).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let p = write("short", b"ab");
    assert_eq!(run(&["match", "-p", s(&p), "-k", "3"], Some(b"abab")).status.code(), Some(1));
    assert_eq!(run(&["match", "-p", "/nonexistent/pattern", "-k", "1"], None).status.code(), Some(2));
    assert_eq!(run(&["match", "-k", "1"], None).status.code(), Some(1));
    let junk = write("junk", b"not a message");
    assert_eq!(run(&["decode", "-m", s(&junk)], None).status.code(), Some(3));
    assert_eq!(run(&["match", "-p", s(&p), "-k", "0", "--prime", "15"], Some(b"ab")).status.code(), Some(1));
}

#[test]
fn encode_decode_round_trip() {
    let pat = b"the quick brown fox jumps over the lazy dog, the quick brown fox";
    let mut txt = pat.to_vec();
    txt[10] = b'X';
    txt.truncate(pat.len() + 10);
    txt.extend_from_slice(b"0123456789");
    let p = write("fox-p", pat);
    let t = write("fox-t", &txt);
    let m = scratch("fox-m");
    let enc = run(&["encode", "-p", s(&p), "-t", s(&t), "-k", "2", "-o", s(&m)], None);
    assert!(enc.status.success());
    let bits: u64 = String::from_utf8(enc.stdout).unwrap().trim().parse().unwrap();
    assert_eq!(bits, 8 * std::fs::metadata(&m).unwrap().len());
    let dec = run(&["decode", "-m", s(&m)], None);
    let ora = run(&["oracle", "-p", s(&p), "-t", s(&t), "-k", "2"], None);
    assert!(!ora.stdout.is_empty());
    assert_eq!(dec.stdout, ora.stdout);

    let none = write("none-t", b"zzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzzz");
    let enc = run(&["encode", "-p", s(&p), "-t", s(&none), "-k", "2", "-o", s(&m)], None);
    assert!(enc.status.success());
    assert!(std::fs::metadata(&m).unwrap().len() <= 16);
}

#[test]
fn bench_prints_json() {
    let out = run(&["bench", "-n", "512", "-k", "4"], None);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let run0 = &v["runs"][0];
    assert_eq!(run0["n"], 512);
    assert!(run0["peak_words"].as_u64().unwrap() > 0);
    assert!(run0["ns_per_symbol"]["median"].as_u64().is_some());
}
