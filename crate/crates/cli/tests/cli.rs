//! Black-box tests of the binary: exit codes, encodings, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_slp")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("slp-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

const ABAABABA: &str = "SLPv1 6 5\n0 T 97\n1 T 98\n2 P 0 1\n3 P 2 0\n4 P 3 2\n5 P 4 3\n";

fn fixture() -> PathBuf {
    let p = tmp("abaababa.slp");
    std::fs::write(&p, ABAABABA).unwrap();
    p
}

#[test]
fn access_prints_character() {
    let p = fixture();
    for engine in ["baseline", "linear", "biased"] {
        let out = run(&["access", p.to_str().unwrap(), "5", "--engine", engine]);
        assert!(out.status.success());
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "a");
    }
    // --cost adds a JSON record.
    let out = run(&["access", p.to_str().unwrap(), "5", "--cost"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("pred_visits"));
}

#[test]
fn access_out_of_range_is_usage_error() {
    let p = fixture();
    let out = run(&["access", p.to_str().unwrap(), "8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extract_writes_raw_bytes() {
    let p = fixture();
    let out = run(&["extract", p.to_str().unwrap(), "2", "5"]);
    assert!(out.status.success());
    assert_eq!(out.stdout, b"aab");
    // Empty span.
    let out = run(&["extract", p.to_str().unwrap(), "3", "3"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn search_exit_codes() {
    let p = fixture();
    let out = run(&["search", p.to_str().unwrap(), "ab", "--k", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1\n4\n6\n");
    // No occurrences: exit 1.
    let out = run(&["search", p.to_str().unwrap(), "zz", "--k", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    // k >= m: usage error.
    let out = run(&["search", p.to_str().unwrap(), "ab", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_fixture_and_rejects_bad_files() {
    let p = fixture();
    let out = run(&["verify", p.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS") || l.starts_with("SKIP")));
    assert!(text.contains("PASS oracle-access"));

    // Forward reference: parse failure, exit 2.
    let bad = tmp("bad.slp");
    std::fs::write(&bad, "SLPv1 5 4\n0 T 97\n1 T 98\n2 P 0 1\n3 P 4 0\n4 P 3 2\n").unwrap();
    let out = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("forward reference"));

    // Missing file: exit 2.
    let out = run(&["verify", tmp("missing.slp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_rejects_empty_input() {
    let empty = tmp("empty.bin");
    std::fs::write(&empty, b"").unwrap();
    let out_slp = tmp("empty.slp");
    let out = run(&["build", empty.to_str().unwrap(), out_slp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn build_reports_compression_on_stderr() {
    let input = tmp("periodic.bin");
    std::fs::write(&input, "abcabc".repeat(200_000)).unwrap();
    let grammar = tmp("periodic.slp");
    let out = run(&["build", input.to_str().unwrap(), grammar.to_str().unwrap()]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("N = 1200000"), "stderr: {err}");
    let n: usize = err
        .split("n = ")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(n < 1_200, "n = {n} is not << N");
}

#[test]
fn utf8_roundtrip() {
    let input = tmp("utf8.txt");
    std::fs::write(&input, "héllo wörld — ascii too".as_bytes()).unwrap();
    let grammar = tmp("utf8.slp");
    let out = run(&[
        "build",
        input.to_str().unwrap(),
        grammar.to_str().unwrap(),
        "--utf8",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&input).unwrap();
    let len = text.chars().count().to_string();
    let out = run(&["extract", grammar.to_str().unwrap(), "0", &len, "--utf8"]);
    assert!(out.status.success());
    assert_eq!(out.stdout, text.as_bytes());
    // Without --utf8, characters above Latin-1 fail to encode.
    let out = run(&["extract", grammar.to_str().unwrap(), "0", &len]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn latin1_roundtrip_all_bytes() {
    let input = tmp("latin1.bin");
    let data: Vec<u8> = (0..=255u8).cycle().take(4096).collect();
    std::fs::write(&input, &data).unwrap();
    let grammar = tmp("latin1.slp");
    assert!(run(&["build", input.to_str().unwrap(), grammar.to_str().unwrap()])
        .status
        .success());
    let out = run(&["extract", grammar.to_str().unwrap(), "0", "4096"]);
    assert_eq!(out.stdout, data);
}

#[test]
fn bench_csv_is_deterministic_across_runs_and_threads() {
    let p = fixture();
    let input = tmp("bench.bin");
    std::fs::write(&input, "the quick brown fox ".repeat(3_000)).unwrap();
    let grammar = tmp("bench.slp");
    assert!(run(&["build", input.to_str().unwrap(), grammar.to_str().unwrap()])
        .status
        .success());
    let args = ["bench", grammar.to_str().unwrap(), "--queries", "500", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed must give identical CSV");
    let threaded = run(&[
        "bench",
        grammar.to_str().unwrap(),
        "--queries",
        "500",
        "--seed",
        "11",
        "--threads",
        "4",
    ]);
    assert_eq!(a.stdout, threaded.stdout, "thread count must not change the CSV");
    let csv = String::from_utf8_lossy(&a.stdout);
    assert!(csv.starts_with("engine,levels,build_work"));
    assert_eq!(csv.lines().count(), 4);
    let _ = p;
}

#[test]
fn stats_emits_json_lines_and_dot() {
    let p = fixture();
    let out = run(&["stats", p.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    let first: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(first["h_roots"], 2);
    let second: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(second["path_count"], 2);
    let out = run(&["stats", p.to_str().unwrap(), "--dump-ibst"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("digraph"));
}

#[test]
fn unknown_flags_rejected() {
    let p = fixture();
    let out = run(&["access", p.to_str().unwrap(), "0", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
