//! End-to-end runs of the `aengine` binary: exit codes, stream contents,
//! and the mutate/diff workflow as a user would drive it.

use std::path::Path;
use std::process::{Command, Output};

use analytical_engine::cli::SHIPPED_DECKS;

fn aengine(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aengine"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn exported_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = aengine(&["export", "--dir", "."], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    dir
}

#[test]
fn export_writes_the_four_decks() {
    let dir = exported_dir();
    for (name, text) in SHIPPED_DECKS {
        let on_disk = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(on_disk, text, "{name}");
    }
}

#[test]
fn run_note_g_full_prints_marker_and_finals() {
    let dir = exported_dir();
    let out = aengine(&["run", "note_g_full.deck", "--trace", "table"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(
        text.matches("Here follows a repetition of Operations").count(),
        1
    );
    assert!(text.ends_with("V24 = -1/30\n"), "finals end with the new B");
}

#[test]
fn run_jsonl_is_records_only() {
    let dir = exported_dir();
    let out = aengine(&["run", "note_d.deck", "--set", "V1=1", "--set", "V2=1",
        "--set", "V3=3", "--set", "V4=1", "--set", "V5=-1", "--set", "V6=1",
        "--trace", "jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 11);
    for line in text.lines() {
        serde_json::from_str::<serde_json::Value>(line).expect("every line is JSON");
    }
}

#[test]
fn run_maps_errors_to_exit_codes() {
    let dir = exported_dir();
    // Unreadable file.
    let out = aengine(&["run", "missing.deck"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // Unparseable deck.
    std::fs::write(dir.path().join("broken.deck"), "DECK x\nSTEP 1 NOP V1 V2 -> V3\nEND\n")
        .unwrap();
    let out = aengine(&["run", "broken.deck"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!stderr(&out).is_empty());
    // Unbound inputs.
    let out = aengine(&["run", "note_d.deck"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("never bound"));
    // Division by zero carries its step.
    let out = aengine(&["run", "note_d.deck", "--set", "V1=1", "--set", "V2=1",
        "--set", "V3=1", "--set", "V4=2", "--set", "V5=2", "--set", "V6=2"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("step 10"));
    // Step budget exhausted.
    let out = aengine(
        &["run", "note_g_full.deck", "--max-steps", "40"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("limit"));
    // Bad --set syntax.
    let out = aengine(&["run", "note_d.deck", "--set", "W1=3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bernoulli_paths() {
    let dir = exported_dir();
    let out = aengine(
        &["bernoulli", "--n", "10", "--convention", "modern", "--method", "demorgan"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "5/66\n");

    let out = aengine(
        &["bernoulli", "--n", "7", "--convention", "lovelace", "--method", "engine"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "-1/30\n");

    let out = aengine(&["bernoulli", "--n", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0\n");

    let out = aengine(
        &["bernoulli", "--n", "2", "--convention", "lovelace"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_and_primes_pass() {
    let dir = exported_dir();
    let out = aengine(&["check"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(stdout(&out).matches(" PASS").count(), 5);

    let out = aengine(&["primes"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("all prime\n"));

    let out = aengine(&["primes", "--count", "41"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mutate_diff_restore_workflow() {
    let dir = exported_dir();
    let run = |args: &[&str]| aengine(args, dir.path());

    let out = run(&["run", "note_g_cycle.deck", "--trace", "jsonl"]);
    assert_eq!(out.status.code(), Some(0));
    std::fs::write(dir.path().join("good.jsonl"), &out.stdout).unwrap();

    let out = run(&["mutate", "note_g_cycle.deck", "--flip-at", "6", "--kind", "sub-add",
        "--out", "bad.deck"]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["run", "bad.deck", "--trace", "jsonl"]);
    assert_eq!(out.status.code(), Some(0));
    std::fs::write(dir.path().join("bad.jsonl"), &out.stdout).unwrap();

    let out = run(&["diff", "good.jsonl", "bad.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("ordinal 6, step 6"));

    let out = run(&["diff", "good.jsonl", "good.jsonl"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "identical\n");

    // A human-format table is not a trace.
    let out = run(&["run", "note_g_cycle.deck", "--trace", "table"]);
    std::fs::write(dir.path().join("table.txt"), &out.stdout).unwrap();
    let out = run(&["diff", "good.jsonl", "table.txt"]);
    assert_eq!(out.status.code(), Some(2));

    // Restoring the flip restores byte-for-byte agreement.
    let out = run(&["mutate", "bad.deck", "--flip-at", "6", "--kind", "sub-add",
        "--out", "restored.deck"]);
    assert_eq!(out.status.code(), Some(0));
    let original = std::fs::read_to_string(dir.path().join("note_g_cycle.deck")).unwrap();
    let restored = std::fs::read_to_string(dir.path().join("restored.deck")).unwrap();
    assert_eq!(restored, original);
    let out = run(&["run", "restored.deck", "--trace", "jsonl"]);
    assert_eq!(out.stdout, std::fs::read(dir.path().join("good.jsonl")).unwrap());

    // Flipping a multiplication step is refused.
    let out = run(&["mutate", "note_g_cycle.deck", "--flip-at", "1", "--kind", "sub-add"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = aengine(&["bernoulli"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = aengine(&["no-such-command"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = aengine(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}
