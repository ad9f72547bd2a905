//! Exit-code and file-format behavior of the `fpe` binary.

use std::process::{Command, Output};

fn fpe(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpe"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn fpe")
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpe(&["train", "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpe(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpe(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["ingest", "label", "split", "synth", "train", "evaluate", "sweep", "buckets", "neighborhood", "report"] {
        assert!(text.contains(sub), "help missing `{sub}`");
    }
}

#[test]
fn evaluate_without_checkpoint_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpe(
        &["synth", "--users", "6", "--articles", "20", "--min-comments-per-user", "12", "--max-comments-per-user", "15", "--out", "d"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = fpe(
        &["evaluate", "--corpus", "d/corpus.jsonl", "--out", "d"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checkpoint"));
}

#[test]
fn malformed_corpus_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.jsonl"), "this is not json\n").unwrap();
    let out = fpe(&["ingest", "--corpus", "bad.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn failing_plugin_is_plugin_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpe(
        &["synth", "--users", "6", "--articles", "20", "--min-comments-per-user", "12", "--max-comments-per-user", "15", "--out", "d"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    // `false` exits immediately; spawning it as a labeler plugin fails.
    let out = fpe(
        &["label", "--corpus", "d/corpus.jsonl", "--labeler", "plugin:false", "--out", "d"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for out_dir in ["one", "two"] {
        let out = fpe(
            &["synth", "--seed", "7", "--users", "8", "--articles", "24", "--min-comments-per-user", "10", "--max-comments-per-user", "14", "--out", out_dir],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("one/corpus.jsonl"), read("two/corpus.jsonl"));
    assert_eq!(read("one/truth.jsonl"), read("two/truth.jsonl"));
}

#[test]
fn split_writes_ranges_json() {
    let dir = tempfile::tempdir().unwrap();
    fpe(
        &["synth", "--users", "6", "--articles", "20", "--min-comments-per-user", "20", "--max-comments-per-user", "20", "--out", "d"],
        dir.path(),
    );
    let out = fpe(
        &["split", "--corpus", "d/corpus.jsonl", "--min-comments", "10", "--out", "d"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let raw = std::fs::read_to_string(dir.path().join("d/splits.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&raw).unwrap();
    // N=20 with default fracs: train 16, validation 2, test 2.
    let user = &value["by_user"]["u0000"];
    assert_eq!(user["train"]["end"], 16);
    assert_eq!(user["test"]["start"], 18);
    assert_eq!(user["test"]["end"], 20);
}

#[test]
fn report_summarizes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpe(&["report", "--out", "missing"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    std::fs::create_dir_all(dir.path().join("arts")).unwrap();
    std::fs::write(dir.path().join("arts/sweep.csv"), "length,mean_f1\n5,0.5\n").unwrap();
    let out = fpe(&["report", "--out", "arts"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep.csv"));
}
